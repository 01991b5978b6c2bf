#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "dpgm/bounds.hpp"
#include "dpgm/config.hpp"
#include "dpgm/errors.hpp"
#include "dpgm/harness.hpp"
#include "dpgm/oracle.hpp"

namespace fs = std::filesystem;
using namespace dpgm;

namespace {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> runs;
    std::optional<std::string> out_dir;
    std::optional<int> workers;
};

ExperimentConfig load(const std::string& path, const Overrides& o) {
    auto cfg = load_experiment_config(path);
    if (o.seed) cfg.master_seed = *o.seed;
    if (o.runs) {
        if (*o.runs < 1) throw ConfigError("--runs: must be at least 1");
        cfg.runs = *o.runs;
    }
    if (o.out_dir) cfg.out_dir = *o.out_dir;
    if (o.workers) cfg.workers = *o.workers;
    return cfg;
}

std::ofstream open_output(const ExperimentConfig& cfg, const std::string& file) {
    fs::create_directories(cfg.out_dir);
    const auto path = fs::path(cfg.out_dir) / file;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    std::cout << "wrote " << path.string() << '\n';
    return out;
}

int cmd_run(const ExperimentConfig& cfg) {
    const auto result = run_experiment(cfg);
    {
        auto out = open_output(cfg, cfg.name + "_results.csv");
        write_results_csv(out, result, cfg.per_replicate);
    }
    const auto summary = summarize(result);
    auto out = open_output(cfg, "summary.txt");
    out << summary.text;
    std::cout << summary.text;
    return 0;
}

int cmd_bounds(const ExperimentConfig& cfg) {
    const auto networks = build_networks(cfg);
    const auto cells = expand_grid(cfg, networks);
    const auto problem = replicate_problem(cfg, 0);
    const auto& seq = problem.sequence;
    const auto constants = aggregate_constants(seq);
    const OracleOptions opts{cfg.oracle_tol};
    const auto star = compute_oracle(seq, networks.front(), std::nullopt, opts);
    const int size = seq.node_count() * seq.dim();

    std::ostringstream report;
    report << std::setprecision(6);
    report << "Lf " << constants.Lf << "  mf " << constants.mf << "  Lg " << constants.Lg_network << "\n";
    int written = 0;
    for (const auto& cell : cells) {
        if (cell.solver.algorithm != Algorithm::DPGM) continue;
        const auto& net = networks[static_cast<std::size_t>(cell.topology_index)];
        const auto tilde = compute_oracle(seq, net, cell.alpha, opts);
        const auto drift = drift_constants(tilde);
        const auto tc = make_constants(cell.alpha, constants.Lf, constants.mf, net.lambda_min(), net.rho());
        const double eta = cell.noise.model(size).combined_eta(cell.alpha);
        const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(size);
        const auto d0 = empirical_error_vector(x0, star.x_star.front(), tilde.x_tilde.front(), seq.dim());
        const auto trace = online_bound_trace(d0, seq.horizon(), cell.solver.inner_steps, tc, constants.Lg_network,
                                              drift.sigma, drift.sigma_prime, eta);
        auto out = open_output(cfg, cfg.name + "_bounds_cell" + std::to_string(cell.id) + ".csv");
        write_bound_trace_csv(out, trace, {});
        report << "cell " << cell.id << "  " << cell.topology.name() << "  Mo " << cell.solver.inner_steps
               << "  alpha " << cell.alpha << "  noise " << cell.noise.id << "  delta " << tc.delta << "  zeta "
               << tc.zeta_phi << "  c " << tc.c << "  rho " << tc.rho << "  sigma " << drift.sigma << "  sigma' "
               << drift.sigma_prime << "  eta " << eta << "  asymptotic ";
        if (tc.delta < 1.0)
            report << asymptotic_bound(tc, cell.solver.inner_steps, constants.Lg_network, drift.sigma,
                                       drift.sigma_prime, eta);
        else
            report << "none (delta >= 1)";
        report << '\n';
        ++written;
    }
    if (written == 0) throw ConfigError(cfg.name + ": no DPGM solver cells to bound");
    auto out = open_output(cfg, cfg.name + "_bounds.txt");
    out << report.str();
    std::cout << report.str();
    return 0;
}

int cmd_oracle(const ExperimentConfig& cfg) {
    const auto networks = build_networks(cfg);
    const auto cells = expand_grid(cfg, networks);
    const auto seq = replicate_problem(cfg, 0).sequence;
    const OracleOptions opts{cfg.oracle_tol};
    const auto star = compute_oracle(seq, networks.front(), std::nullopt, opts);
    {
        auto out = open_output(cfg, cfg.name + "_oracle.csv");
        write_oracle_csv(out, star);
    }
    std::set<std::pair<int, double>> done;
    for (const auto& cell : cells) {
        if (cell.solver.algorithm != Algorithm::DPGM || !done.insert({cell.topology_index, cell.alpha}).second)
            continue;
        const auto tilde =
            compute_oracle(seq, networks[static_cast<std::size_t>(cell.topology_index)], cell.alpha, opts);
        const auto drift = drift_constants(tilde);
        auto out = open_output(cfg, cfg.name + "_relaxed_cell" + std::to_string(cell.id) + ".csv");
        write_relaxed_csv(out, tilde);
        std::cout << "cell " << cell.id << "  " << cell.topology.name() << "  alpha " << cell.alpha << "  sigma "
                  << drift.sigma << "  sigma' " << drift.sigma_prime << '\n';
    }
    return 0;
}

int cmd_validate(const ExperimentConfig& cfg) {
    int failures = 0;
    auto report = [&](bool ok, const std::string& what) {
        std::cout << (ok ? "PASS " : "FAIL ") << what << '\n';
        if (!ok) ++failures;
    };
    const auto networks = build_networks(cfg);
    for (std::size_t t = 0; t < networks.size(); ++t) {
        const auto r = spectral_check(networks[t]);
        std::ostringstream os;
        os << cfg.topologies[t].name() << ": doubly stochastic, symmetric, matches graph (lambda_min "
           << r.lambda_min << ", rho " << r.rho << ")";
        report(r.is_doubly_stochastic && r.is_symmetric && r.pattern_matches && r.rho < 1.0, os.str());
    }
    const auto seq = replicate_problem(cfg, 0).sequence;
    const auto constants = aggregate_constants(seq);
    report(constants.mf > 0.0 && constants.mf <= constants.Lf, "strong convexity: mf = " + std::to_string(constants.mf) +
                                                                     ", Lf = " + std::to_string(constants.Lf));

    std::mt19937_64 rng(cfg.master_seed);
    std::normal_distribution<double> gauss;
    const int size = seq.node_count() * seq.dim();
    double worst_fd = 0.0, worst_prox = 0.0;
    for (int k : {0, seq.horizon()}) {
        const auto& p = seq.at(k);
        Eigen::VectorXd x(size), v(size);
        for (int i = 0; i < size; ++i) x(i) = gauss(rng), v(i) = gauss(rng);
        const double h = 1e-6;
        const auto smooth_value = [&](const Eigen::VectorXd& u) {
            double sum = 0.0;
            for (int node = 0; node < seq.node_count(); ++node)
                sum += p.smooth()[static_cast<std::size_t>(node)].value(u.segment(node * seq.dim(), seq.dim()));
            return sum;
        };
        const double fd = (smooth_value(x + h * v) - smooth_value(x - h * v)) / (2 * h);
        const double exact = p.gradient(x).dot(v);
        worst_fd = std::max(worst_fd, std::abs(fd - exact) / std::max(1.0, std::abs(exact)));
        const double step = 0.5;
        const Eigen::VectorXd z = p.prox(x, step);
        // prox optimality: (x - z) / step is a subgradient of g at z, componentwise
        const Eigen::VectorXd r = (x - z) / step;
        for (int node = 0; node < seq.node_count(); ++node) {
            const double lam = p.nonsmooth()[static_cast<std::size_t>(node)].weight();
            for (int j = 0; j < seq.dim(); ++j) {
                const int i = node * seq.dim() + j;
                const double viol = z(i) != 0.0 ? std::abs(r(i) - lam * (z(i) > 0 ? 1.0 : -1.0))
                                                : std::max(0.0, std::abs(r(i)) - lam);
                worst_prox = std::max(worst_prox, viol);
            }
        }
    }
    report(worst_fd < 1e-4, "gradient vs finite differences (relative error " + std::to_string(worst_fd) + ")");
    report(worst_prox < 1e-12, "prox optimality residual " + std::to_string(worst_prox));

    for (const auto& cell : expand_grid(cfg, networks)) {
        if (cell.solver.algorithm != Algorithm::DPGM) continue;
        const auto& net = networks[static_cast<std::size_t>(cell.topology_index)];
        const auto tc = make_constants(cell.alpha, constants.Lf, constants.mf, net.lambda_min(), net.rho());
        std::ostringstream os;
        os << "cell " << cell.id << " step size alpha = " << cell.alpha << " within (0, " << tc.alpha_max_prop
           << "), delta = " << tc.delta;
        report(cell.step_size_ok && tc.delta < 1.0, os.str());
    }

    const auto star = compute_oracle(seq, networks.front(), std::nullopt, {cfg.oracle_tol});
    report(star.x_star.size() == static_cast<std::size_t>(seq.horizon()) + 1,
           "consensus oracle solved for every k to tol " + std::to_string(cfg.oracle_tol));
    std::cout << (failures == 0 ? "all checks passed" : std::to_string(failures) + " check(s) failed") << '\n';
    return failures == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Online decentralized proximal gradient experiments"};
    app.require_subcommand(1);
    Overrides o;
    std::string config_path;
    int (*action)(const ExperimentConfig&) = nullptr;

    auto add = [&](const char* name, const char* help, int (*fn)(const ExperimentConfig&)) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("config", config_path, "experiment config file")->required();
        sub->add_option("--seed", o.seed, "override master seed");
        sub->add_option("--runs", o.runs, "override Monte Carlo runs");
        sub->add_option("--out-dir", o.out_dir, "override output directory");
        sub->add_option("--workers", o.workers, "worker threads");
        sub->callback([&action, fn] { action = fn; });
    };
    add("run", "run the Monte Carlo grid and write results", cmd_run);
    add("bounds", "evaluate the error bounds without simulation", cmd_bounds);
    add("oracle", "export oracle trajectories", cmd_oracle);
    add("validate", "check invariants of the configured scenario", cmd_validate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const auto cfg = load(config_path, o);
        return action(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
