#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dpgm/config.hpp"
#include "dpgm/network.hpp"
#include "dpgm/oracle.hpp"

namespace dpgm {

struct GridCell {
    int id = 0;
    int topology_index = 0;
    int noise_index = 0;
    TopologySpec topology;
    SolverSpec solver;
    NoiseSpec noise;
    double alpha = 0.0;  ///< resolved step size
    bool step_size_ok = true;  ///< only meaningful for DPGM
};

struct MetricSeries {
    std::vector<double> err;         ///< ||x(t_k) - 1 kron x*(t_k)||, k = 0..K
    std::vector<double> cumulative;  ///< E_k
    std::vector<Eigen::Vector3d> d;      ///< empirical error vector; d3 is NaN without x~
    std::vector<Eigen::Vector3d> bound;  ///< empty unless bounds are enabled for the cell
    bool diverged = false;
    int diverged_at = -1;
};

/// E_0 = err_0 and E_k = (1/k) sum_{h=0}^{k} err_h.
std::vector<double> cumulative_error(const std::vector<double>& err);

struct SeriesStats {
    std::vector<double> mean;
    std::vector<double> stderr_;
};

/// Per-index mean and standard error (sample std / sqrt(n)) across equal-length series.
SeriesStats series_stats(const std::vector<std::vector<double>>& series);

struct CellResult {
    GridCell cell;
    std::vector<MetricSeries> replicates;  ///< indexed by replicate
    std::optional<std::string> failure;
    int diverged_runs = 0;

    SeriesStats err, cumulative;
    SeriesStats d[3], bound[3];
    double final_mean = 0.0;    ///< mean E_K over replicates
    double final_stderr = 0.0;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<CellResult> cells;
};

/// Replicate seeds are pure functions of (master_seed, replicate, stream).
std::uint64_t replicate_seed(std::uint64_t master_seed, int replicate, int stream);

/// Step-size choice when alpha is "auto": 0.9 of the admissible range of each method.
double default_step_size(Algorithm algorithm, double Lf, double mf, double lambda_min);

std::vector<ConsensusNetwork> build_networks(const ExperimentConfig& config);
GeneratedProblem replicate_problem(const ExperimentConfig& config, int replicate);
std::vector<GridCell> expand_grid(const ExperimentConfig& config, const std::vector<ConsensusNetwork>& networks);

/// Tracking metrics of one trajectory against oracle data. `x_tilde` may be empty.
MetricSeries compute_metrics(const std::vector<Eigen::VectorXd>& states, const std::vector<Eigen::VectorXd>& x_star,
                             const std::vector<Eigen::VectorXd>& x_tilde, int dim);

/// Worker count: config value, else DPGM_WORKERS, else hardware concurrency.
int worker_count(const ExperimentConfig& config);

ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes aggregated rows (replicate = "mean"), or every replicate when `per_replicate`.
void write_results_csv(std::ostream& out, const ExperimentResult& result, bool per_replicate);

struct PlateauReport {
    std::string algorithm;
    std::string topology;
    std::string noise_id;
    std::vector<int> inner_steps;
    std::vector<double> final_mean;
    std::optional<int> plateau_at;  ///< smallest M_o beyond which E_K improves by < 5% relative
};

/// Smallest entry i (not the last) such that every later value improves on v[i] by less
/// than `tolerance` relative to v[i]. Assumes `values` ordered by increasing M_o.
std::optional<std::size_t> plateau_index(const std::vector<double>& values, double tolerance = 0.05);

struct Summary {
    std::vector<PlateauReport> plateaus;
    std::string text;
};

Summary summarize(const ExperimentResult& result);

} // namespace dpgm
