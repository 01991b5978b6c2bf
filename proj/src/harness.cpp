#include "dpgm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "dpgm/bounds.hpp"
#include "dpgm/errors.hpp"
#include "dpgm/stacked.hpp"

namespace dpgm {

std::vector<double> cumulative_error(const std::vector<double>& err) {
    std::vector<double> out(err.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < err.size(); ++k) {
        sum += err[k];
        out[k] = k == 0 ? sum : sum / static_cast<double>(k);
    }
    return out;
}

SeriesStats series_stats(const std::vector<std::vector<double>>& series) {
    SeriesStats s;
    if (series.empty()) return s;
    const std::size_t len = series.front().size();
    const double n = static_cast<double>(series.size());
    s.mean.assign(len, 0.0);
    s.stderr_.assign(len, 0.0);
    for (const auto& row : series)
        for (std::size_t k = 0; k < len; ++k) s.mean[k] += row[k];
    for (auto& m : s.mean) m /= n;
    if (series.size() > 1) {
        for (const auto& row : series)
            for (std::size_t k = 0; k < len; ++k) s.stderr_[k] += (row[k] - s.mean[k]) * (row[k] - s.mean[k]);
        for (auto& v : s.stderr_) v = std::sqrt(v / (n - 1.0) / n);
    }
    return s;
}

std::uint64_t replicate_seed(std::uint64_t master_seed, int replicate, int stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(replicate), static_cast<std::uint32_t>(stream)};
    std::uint32_t words[2];
    seq.generate(words, words + 2);
    return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

double default_step_size(Algorithm algorithm, double Lf, double mf, double lambda_min) {
    switch (algorithm) {
    case Algorithm::DPGM: return suggest_step_size(Lf, mf, lambda_min);
    case Algorithm::PG_EXTRA: return 0.9 * (1.0 + lambda_min) / Lf;
    case Algorithm::NIDS: return 0.9 * 2.0 / Lf;
    }
    return 0.0;
}

std::vector<ConsensusNetwork> build_networks(const ExperimentConfig& config) {
    std::vector<ConsensusNetwork> nets;
    for (const auto& spec : config.topologies)
        nets.push_back(metropolis_hastings(build_topology(spec, config.nodes, config.topology_seed)));
    return nets;
}

GeneratedProblem replicate_problem(const ExperimentConfig& config, int replicate) {
    const std::uint64_t seed =
        config.resample_scenario ? replicate_seed(config.scenario_seed, replicate, 0) : config.scenario_seed;
    return generate_sparse_regression(config.nodes, config.scenario, seed);
}

std::vector<GridCell> expand_grid(const ExperimentConfig& config, const std::vector<ConsensusNetwork>& networks) {
    const auto constants = aggregate_constants(replicate_problem(config, 0).sequence);
    std::vector<GridCell> cells;
    for (std::size_t t = 0; t < config.topologies.size(); ++t) {
        const auto& net = networks[t];
        for (std::size_t v = 0; v < config.noises.size(); ++v) {
            for (const auto& s : config.solvers) {
                GridCell c;
                c.id = static_cast<int>(cells.size());
                c.topology_index = static_cast<int>(t);
                c.noise_index = static_cast<int>(v);
                c.topology = config.topologies[t];
                c.solver = s;
                c.noise = config.noises[v];
                c.alpha = s.alpha ? *s.alpha
                                  : default_step_size(s.algorithm, constants.Lf, constants.mf, net.lambda_min());
                if (s.algorithm == Algorithm::DPGM)
                    c.step_size_ok = check_step_size(c.alpha, constants.Lf, constants.mf, net.lambda_min()).prop_ok;
                cells.push_back(c);
            }
        }
    }
    return cells;
}

MetricSeries compute_metrics(const std::vector<Eigen::VectorXd>& states, const std::vector<Eigen::VectorXd>& x_star,
                             const std::vector<Eigen::VectorXd>& x_tilde, int dim) {
    MetricSeries m;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 0; k < states.size(); ++k) {
        const auto& x = states[k];
        const int nodes = static_cast<int>(x.size() / dim);
        m.err.push_back((x - lift(x_star[k], nodes)).norm());
        if (x_tilde.empty()) {
            const Eigen::VectorXd avg = consensus_average(x, dim);
            m.d.emplace_back((avg - lift(x_star[k], nodes)).norm(), (x - avg).norm(), nan);
        } else {
            m.d.push_back(empirical_error_vector(x, x_star[k], x_tilde[k], dim));
        }
    }
    m.cumulative = cumulative_error(m.err);
    return m;
}

int worker_count(const ExperimentConfig& config) {
    if (config.workers > 0) return config.workers;
    if (const char* env = std::getenv("DPGM_WORKERS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

struct ReplicateOutcome {
    std::vector<MetricSeries> per_cell;
    std::vector<std::optional<std::string>> failure;
};

ReplicateOutcome run_replicate(const ExperimentConfig& config, const std::vector<ConsensusNetwork>& networks,
                               const std::vector<GridCell>& cells, int replicate) {
    ReplicateOutcome out;
    out.per_cell.resize(cells.size());
    out.failure.resize(cells.size());
    const auto problem = replicate_problem(config, replicate);
    const auto& seq = problem.sequence;
    const int dim = seq.dim();
    const int size = seq.node_count() * dim;
    const OracleOptions opts{config.oracle_tol};

    OracleTrajectory star;
    try {
        star = compute_oracle(seq, networks.front(), std::nullopt, opts);
    } catch (const OracleError& e) {
        for (auto& f : out.failure) f = std::string("oracle: ") + e.what();
        return out;
    }
    const auto constants = aggregate_constants(seq);

    // x~ trajectories keyed by (topology, alpha)
    std::map<std::pair<int, double>, OracleTrajectory> relaxed;

    for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto& cell = cells[c];
        const auto& net = networks[static_cast<std::size_t>(cell.topology_index)];
        const bool with_bound = config.compute_bounds && cell.solver.algorithm == Algorithm::DPGM;
        const OracleTrajectory* tilde = nullptr;
        if (with_bound) {
            const auto key = std::make_pair(cell.topology_index, cell.alpha);
            auto it = relaxed.find(key);
            if (it == relaxed.end()) {
                try {
                    it = relaxed.emplace(key, compute_oracle(seq, net, cell.alpha, opts)).first;
                } catch (const OracleError& e) {
                    out.failure[c] = std::string("relaxed oracle: ") + e.what();
                    continue;
                }
            }
            tilde = &it->second;
        }

        SolverConfig sc;
        sc.alpha = cell.alpha;
        sc.inner_steps = cell.solver.inner_steps;
        sc.algorithm = cell.solver.algorithm;
        sc.seed = replicate_seed(config.master_seed, replicate, cell.noise_index + 1);
        const NoiseModel noise = cell.noise.model(size);
        SolverTrajectory traj;
        try {
            traj = run_online(seq, net, sc, noise);
        } catch (const NumericError& e) {
            traj.diverged = true;
        }
        static const std::vector<Eigen::VectorXd> none;
        auto m = compute_metrics(traj.states, star.x_star, tilde ? tilde->x_tilde : none, dim);
        m.diverged = traj.diverged;
        m.diverged_at = traj.diverged_at;
        if (with_bound && !traj.states.empty()) {
            const auto tc = make_constants(cell.alpha, constants.Lf, constants.mf, net.lambda_min(), net.rho());
            const auto drift = drift_constants(*tilde);
            Eigen::Vector3d d0 = empirical_error_vector(traj.states.front(), star.x_star.front(),
                                                        tilde->x_tilde.front(), dim);
            m.bound = online_bound_trace(d0, seq.horizon(), cell.solver.inner_steps, tc, constants.Lg_network,
                                         drift.sigma, drift.sigma_prime, noise.combined_eta(cell.alpha));
        }
        out.per_cell[c] = std::move(m);
    }
    return out;
}

std::vector<double> component(const std::vector<Eigen::Vector3d>& v, int i) {
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& x : v) out.push_back(x(i));
    return out;
}

void aggregate(CellResult& cell, int horizon) {
    std::vector<std::vector<double>> err, cum, d[3], b[3];
    const std::size_t len = static_cast<std::size_t>(horizon) + 1;
    for (const auto& r : cell.replicates) {
        if (r.diverged || r.err.size() != len) {
            ++cell.diverged_runs;
            continue;
        }
        err.push_back(r.err);
        cum.push_back(r.cumulative);
        for (int i = 0; i < 3; ++i) {
            d[i].push_back(component(r.d, i));
            if (!r.bound.empty()) b[i].push_back(component(r.bound, i));
        }
    }
    cell.err = series_stats(err);
    cell.cumulative = series_stats(cum);
    for (int i = 0; i < 3; ++i) {
        cell.d[i] = series_stats(d[i]);
        cell.bound[i] = series_stats(b[i]);
    }
    if (cell.diverged_runs > 0 || cum.empty()) {
        cell.final_mean = std::numeric_limits<double>::infinity();
        cell.final_stderr = std::numeric_limits<double>::quiet_NaN();
    } else {
        cell.final_mean = cell.cumulative.mean.back();
        cell.final_stderr = cell.cumulative.stderr_.back();
    }
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
    ExperimentResult result;
    result.config = config;
    const auto networks = build_networks(config);
    const auto cells = expand_grid(config, networks);
    for (const auto& c : cells)
        if (c.solver.algorithm == Algorithm::DPGM && !c.step_size_ok)
            std::cerr << "warning: cell " << c.id << " (" << c.topology.name() << ", alpha=" << c.alpha
                      << ") violates the DPGM step-size condition\n";

    std::vector<ReplicateOutcome> outcomes(static_cast<std::size_t>(config.runs));
    std::atomic<int> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    auto worker = [&] {
        for (int r = next++; r < config.runs; r = next++) {
            try {
                outcomes[static_cast<std::size_t>(r)] = run_replicate(config, networks, cells, r);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    const int workers = std::min(worker_count(config), config.runs);
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);

    for (std::size_t c = 0; c < cells.size(); ++c) {
        CellResult cell;
        cell.cell = cells[c];
        for (auto& o : outcomes) {
            if (o.failure[c] && !cell.failure) cell.failure = o.failure[c];
            cell.replicates.push_back(std::move(o.per_cell[c]));
        }
        if (cell.failure) {
            cell.final_mean = std::numeric_limits<double>::quiet_NaN();
            cell.final_stderr = std::numeric_limits<double>::quiet_NaN();
        } else {
            aggregate(cell, config.scenario.horizon);
        }
        result.cells.push_back(std::move(cell));
    }
    return result;
}

namespace {

void write_value(std::ostream& out, const std::vector<double>& v, std::size_t k) {
    out << ',';
    if (k < v.size() && !std::isnan(v[k])) out << v[k];
}

void write_row_prefix(std::ostream& out, const GridCell& c, const std::string& replicate, std::size_t k) {
    out << c.id << ',' << algorithm_name(c.solver.algorithm) << ',' << c.topology.name() << ','
        << c.solver.inner_steps << ',' << c.alpha << ',' << c.noise.id << ',' << replicate << ',' << k;
}

} // namespace

void write_results_csv(std::ostream& out, const ExperimentResult& result, bool per_replicate) {
    const auto old = out.precision(17);
    out << "cell_id,algorithm,topology,Mo,alpha,noise_id,replicate,k,err,E_k,d1,d2,d3,bound_d1,bound_d2,bound_d3,"
           "bound_out\n";
    for (const auto& cell : result.cells) {
        if (cell.failure) continue;
        if (per_replicate) {
            for (std::size_t r = 0; r < cell.replicates.size(); ++r) {
                const auto& m = cell.replicates[r];
                for (std::size_t k = 0; k < m.err.size(); ++k) {
                    write_row_prefix(out, cell.cell, std::to_string(r), k);
                    out << ',' << m.err[k] << ',' << m.cumulative[k];
                    for (int i = 0; i < 3; ++i) {
                        out << ',';
                        if (!std::isnan(m.d[k](i))) out << m.d[k](i);
                    }
                    if (k < m.bound.size()) {
                        out << ',' << m.bound[k](0) << ',' << m.bound[k](1) << ',' << m.bound[k](2) << ','
                            << output_bound(m.bound[k]);
                    } else {
                        out << ",,,,";
                    }
                    out << '\n';
                }
            }
        } else {
            for (std::size_t k = 0; k < cell.err.mean.size(); ++k) {
                write_row_prefix(out, cell.cell, "mean", k);
                write_value(out, cell.err.mean, k);
                write_value(out, cell.cumulative.mean, k);
                for (int i = 0; i < 3; ++i) write_value(out, cell.d[i].mean, k);
                for (int i = 0; i < 3; ++i) write_value(out, cell.bound[i].mean, k);
                out << ',';
                if (k < cell.bound[0].mean.size()) out << cell.bound[0].mean[k] + cell.bound[1].mean[k];
                out << '\n';
            }
        }
    }
    out.precision(old);
}

std::optional<std::size_t> plateau_index(const std::vector<double>& values, double tolerance) {
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        bool flat = true;
        for (std::size_t j = i + 1; j < values.size(); ++j)
            if (values[i] - values[j] >= tolerance * values[i]) flat = false;
        if (flat) return i;
    }
    return std::nullopt;
}

Summary summarize(const ExperimentResult& result) {
    Summary s;
    std::ostringstream os;
    os << "experiment: " << result.config.name << "  runs: " << result.config.runs
       << "  horizon: " << result.config.scenario.horizon << "  nodes: " << result.config.nodes << "\n\n";

    os << "final cumulative tracking error E_K (mean +- stderr)\n";
    os << std::left << std::setw(6) << "cell" << std::setw(20) << "topology" << std::setw(10) << "algorithm"
       << std::setw(5) << "Mo" << std::setw(12) << "alpha" << std::setw(12) << "noise" << "E_K\n";
    for (const auto& c : result.cells) {
        os << std::left << std::setw(6) << c.cell.id << std::setw(20) << c.cell.topology.name() << std::setw(10)
           << algorithm_name(c.cell.solver.algorithm) << std::setw(5) << c.cell.solver.inner_steps << std::setw(12)
           << std::setprecision(4) << c.cell.alpha << std::setw(12) << c.cell.noise.id;
        if (c.failure) {
            os << "failed: " << *c.failure;
        } else if (c.diverged_runs > 0) {
            os << "divergent (" << c.diverged_runs << " runs)";
        } else {
            os << std::scientific << std::setprecision(3) << c.final_mean << " +- " << c.final_stderr
               << std::defaultfloat;
        }
        if (c.cell.solver.algorithm == Algorithm::DPGM && !c.cell.step_size_ok) os << "  [step size outside range]";
        os << '\n';
    }

    // Table: one row per topology and noise, one column per algorithm at the largest M_o.
    std::vector<Algorithm> algs;
    for (const auto& sp : result.config.solvers)
        if (std::find(algs.begin(), algs.end(), sp.algorithm) == algs.end()) algs.push_back(sp.algorithm);
    os << "\nby topology (largest M_o per algorithm)\n" << std::left << std::setw(20) << "topology" << std::setw(12)
       << "noise";
    for (auto a : algs) os << std::setw(14) << algorithm_name(a);
    os << "ranking\n";
    for (std::size_t t = 0; t < result.config.topologies.size(); ++t) {
        for (std::size_t v = 0; v < result.config.noises.size(); ++v) {
            std::vector<std::pair<double, std::string>> row;
            os << std::setw(20) << result.config.topologies[t].name() << std::setw(12) << result.config.noises[v].id;
            for (auto a : algs) {
                const CellResult* best = nullptr;
                for (const auto& c : result.cells)
                    if (c.cell.topology_index == static_cast<int>(t) && c.cell.noise_index == static_cast<int>(v) &&
                        c.cell.solver.algorithm == a &&
                        (!best || c.cell.solver.inner_steps > best->cell.solver.inner_steps))
                        best = &c;
                std::ostringstream val;
                if (best && !best->failure && best->diverged_runs == 0) {
                    val << std::scientific << std::setprecision(3) << best->final_mean;
                    row.emplace_back(best->final_mean, algorithm_name(a));
                } else {
                    val << "-";
                }
                os << std::setw(14) << val.str();
            }
            std::sort(row.begin(), row.end());
            for (std::size_t i = 0; i < row.size(); ++i) os << (i ? " < " : "") << row[i].second;
            os << '\n';
        }
    }

    // Plateau detection along M_o for each (algorithm, topology, noise, alpha) line.
    std::map<std::tuple<int, int, int, double>, std::vector<const CellResult*>> lines;
    for (const auto& c : result.cells)
        lines[{static_cast<int>(c.cell.solver.algorithm), c.cell.topology_index, c.cell.noise_index, c.cell.alpha}]
            .push_back(&c);
    os << "\nplateau along M_o (improvement < 5%)\n";
    for (auto& [key, group] : lines) {
        if (group.size() < 2) continue;
        std::sort(group.begin(), group.end(),
                  [](auto* a, auto* b) { return a->cell.solver.inner_steps < b->cell.solver.inner_steps; });
        PlateauReport p;
        p.algorithm = algorithm_name(group.front()->cell.solver.algorithm);
        p.topology = group.front()->cell.topology.name();
        p.noise_id = group.front()->cell.noise.id;
        for (auto* c : group) {
            p.inner_steps.push_back(c->cell.solver.inner_steps);
            p.final_mean.push_back(c->final_mean);
        }
        if (auto i = plateau_index(p.final_mean)) p.plateau_at = p.inner_steps[*i];
        os << std::setw(10) << p.algorithm << std::setw(20) << p.topology << std::setw(12) << p.noise_id
           << (p.plateau_at ? "M_o = " + std::to_string(*p.plateau_at) : std::string("none")) << '\n';
        s.plateaus.push_back(std::move(p));
    }
    s.text = os.str();
    return s;
}

} // namespace dpgm
