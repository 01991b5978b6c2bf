#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dpgm/network.hpp"
#include "dpgm/problems.hpp"
#include "dpgm/solvers.hpp"

namespace dpgm {

// A small TOML subset: [section], [[array-of-tables]], key = value, where value
// is a number, a boolean, a string (quoted or bare) or a one-line [list].
// Comments start with '#'.

using ConfigScalar = std::variant<double, bool, std::string>;

struct ConfigValue {
    std::vector<ConfigScalar> items;  ///< one element unless written as a list
    bool is_list = false;
    int line = 0;
};

struct ConfigTable {
    std::string name;
    int line = 0;
    std::map<std::string, ConfigValue> entries;
};

struct ConfigDocument {
    std::string source;
    std::vector<ConfigTable> tables;  ///< in file order; the unnamed root table first
};

/// Throws ConfigError with "source:line: message" diagnostics.
ConfigDocument parse_config_text(const std::string& text, const std::string& source = "<config>");

struct SolverSpec {
    Algorithm algorithm = Algorithm::DPGM;
    std::optional<double> alpha;  ///< unset means "auto"
    int inner_steps = 1;
};

struct NoiseSpec {
    std::string id = "exact";
    double state_mean = 0.0, state_variance = 0.0;
    double gradient_mean = 0.0, gradient_variance = 0.0;
    double prox_mean = 0.0, prox_variance = 0.0;

    /// Isotropic Gaussian sources over stacked vectors of length `size`; zero-variance,
    /// zero-mean sources are left out.
    NoiseModel model(int size) const;
};

struct ExperimentConfig {
    std::string name = "experiment";
    int nodes = 25;
    SparseRegressionParams scenario;
    std::uint64_t scenario_seed = 1;
    bool resample_scenario = true;

    std::vector<TopologySpec> topologies;
    std::uint64_t topology_seed = 1;

    std::vector<SolverSpec> solvers;
    std::vector<NoiseSpec> noises;

    int runs = 100;
    std::uint64_t master_seed = 1;
    bool compute_bounds = false;
    double oracle_tol = 1e-12;
    int workers = 0;  ///< 0: DPGM_WORKERS or hardware concurrency
    std::string out_dir = ".";
    bool per_replicate = false;
};

/// Builds and validates an experiment definition. List values under [[solver]]
/// (algorithm, alpha, inner_steps) and [topology] kinds expand into grid axes.
ExperimentConfig build_experiment_config(const ConfigDocument& doc);
ExperimentConfig load_experiment_config(const std::string& path);

} // namespace dpgm
