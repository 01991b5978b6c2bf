#include "dpgm/solvers.hpp"

#include <iostream>
#include <ostream>
#include <sstream>

#include "dpgm/bounds.hpp"
#include "dpgm/errors.hpp"
#include "dpgm/stacked.hpp"

namespace dpgm {

Algorithm parse_algorithm(const std::string& name) {
    if (name == "dpgm" || name == "DPGM") return Algorithm::DPGM;
    if (name == "pg-extra" || name == "pg_extra" || name == "PG-EXTRA") return Algorithm::PG_EXTRA;
    if (name == "nids" || name == "NIDS") return Algorithm::NIDS;
    throw ConfigError("unknown algorithm: " + name);
}

std::string algorithm_name(Algorithm a) {
    switch (a) {
    case Algorithm::DPGM: return "dpgm";
    case Algorithm::PG_EXTRA: return "pg-extra";
    case Algorithm::NIDS: return "nids";
    }
    return "unknown";
}

namespace {

void require_finite(const Eigen::VectorXd& v, const char* what) {
    if (!v.allFinite()) throw NumericError(std::string("non-finite ") + what);
}

// W~ v = (v + W v) / 2
Eigen::VectorXd half_mix(const ConsensusNetwork& net, const Eigen::VectorXd& v, int dim) {
    return 0.5 * (v + mix(net.weights(), v, dim));
}

} // namespace

StepResult dpgm_step(const Eigen::VectorXd& x, const ProblemSnapshot& problem, const ConsensusNetwork& net,
                     double alpha, const NoiseDraw& noise) {
    const int dim = problem.dim();
    if (x.size() != static_cast<Eigen::Index>(net.node_count()) * dim || problem.node_count() != net.node_count())
        throw ConfigError("state, problem and network dimensions disagree");
    require_finite(x, "state");
    StepResult r;
    r.pre_prox = mix(net.weights(), x + noise.state, dim) - alpha * (problem.gradient(x) + noise.gradient);
    r.state = problem.prox(r.pre_prox, alpha) + noise.prox;
    require_finite(r.state, "iterate");
    return r;
}

BaselineState BaselineState::at(Eigen::VectorXd x0) {
    BaselineState s;
    s.x = std::move(x0);
    return s;
}

void pg_extra_step(BaselineState& s, const ProblemSnapshot& problem, const ConsensusNetwork& net, double alpha,
                   const NoiseDraw& noise) {
    const int dim = problem.dim();
    const Eigen::VectorXd sent = s.x + noise.state;
    const Eigen::VectorXd grad = problem.gradient(s.x) + noise.gradient;
    if (!s.started) {
        s.z = mix(net.weights(), sent, dim) - alpha * grad;
        s.started = true;
    } else {
        s.z += mix(net.weights(), sent, dim) - half_mix(net, s.sent_prev, dim) - alpha * (grad - s.gradient_prev);
    }
    s.x_prev = s.x;
    s.sent_prev = sent;
    s.gradient_prev = grad;
    s.x = problem.prox(s.z, alpha) + noise.prox;
    require_finite(s.x, "PG-EXTRA iterate");
}

void nids_step(BaselineState& s, const ProblemSnapshot& problem, const ConsensusNetwork& net, double alpha,
               const NoiseDraw& noise) {
    const int dim = problem.dim();
    const Eigen::VectorXd grad = problem.gradient(s.x) + noise.gradient;
    if (!s.started) {
        s.z = s.x - alpha * grad;
        s.started = true;
    } else {
        const Eigen::VectorXd sent = 2.0 * s.x - s.x_prev - alpha * (grad - s.gradient_prev) + noise.state;
        s.z += half_mix(net, sent, dim) - s.x;
        s.sent_prev = sent;
    }
    s.x_prev = s.x;
    s.gradient_prev = grad;
    s.x = problem.prox(s.z, alpha) + noise.prox;
    require_finite(s.x, "NIDS iterate");
}

SolverTrajectory run_online(const ProblemSequence& problem, const ConsensusNetwork& net, const SolverConfig& config,
                            const NoiseModel& noise) {
    if (problem.horizon() < 1) throw ConfigError("horizon must be at least 1");
    if (config.inner_steps < 1) throw ConfigError("inner steps per interval must be at least 1");
    if (!(config.alpha > 0.0)) throw ConfigError("step size must be positive");
    if (problem.node_count() != net.node_count()) throw ConfigError("problem and network node counts differ");

    const int dim = problem.dim();
    const int size = net.node_count() * dim;

    if (config.algorithm == Algorithm::DPGM && config.step_size_check != StepSizeCheck::Off) {
        const auto c = aggregate_constants(problem);
        if (!check_step_size(config.alpha, c.Lf, c.mf, net.lambda_min()).prop_ok) {
            std::ostringstream msg;
            msg << "step size " << config.alpha << " violates the admissible range (0, "
                << make_constants(config.alpha, c.Lf, c.mf, net.lambda_min(), net.rho()).alpha_max_prop << ")";
            if (config.step_size_check == StepSizeCheck::Strict) throw ConfigError(msg.str());
            std::cerr << "warning: " << msg.str() << '\n';
        }
    }

    SolverTrajectory traj;
    Eigen::VectorXd x = config.initial_state.value_or(Eigen::VectorXd::Zero(size));
    if (x.size() != size) throw ConfigError("initial state has the wrong size");
    traj.states.reserve(static_cast<std::size_t>(problem.horizon()) + 1);
    traj.states.push_back(x);

    Rng rng(config.seed);
    BaselineState baseline = BaselineState::at(x);

    for (int k = 1; k <= problem.horizon(); ++k) {
        const auto& cost = problem.at(k);
        for (int l = 0; l < config.inner_steps; ++l) {
            const NoiseDraw e = noise.exact() ? NoiseDraw::zero(size) : draw(noise, size, rng);
            Eigen::VectorXd pre_prox;
            try {
                switch (config.algorithm) {
                case Algorithm::DPGM: {
                    auto r = dpgm_step(x, cost, net, config.alpha, e);
                    x = std::move(r.state);
                    pre_prox = std::move(r.pre_prox);
                    break;
                }
                case Algorithm::PG_EXTRA:
                    pg_extra_step(baseline, cost, net, config.alpha, e);
                    x = baseline.x;
                    pre_prox = baseline.z;
                    break;
                case Algorithm::NIDS:
                    nids_step(baseline, cost, net, config.alpha, e);
                    x = baseline.x;
                    pre_prox = baseline.z;
                    break;
                }
            } catch (const NumericError& err) {
                throw NumericError(std::string(err.what()) + " at k=" + std::to_string(k) +
                                   ", l=" + std::to_string(l + 1));
            }
            if (config.record_inner) traj.inner.push_back({k, l + 1, x, std::move(pre_prox), e.prox});
            if (x.norm() > config.divergence_threshold) {
                traj.diverged = true;
                traj.diverged_at = k;
                return traj;
            }
        }
        traj.states.push_back(x);
    }
    return traj;
}

void write_iterates_csv(std::ostream& out, const SolverTrajectory& traj, int dim) {
    out << "k,l,node,component,x,y\n";
    out.precision(17);
    for (const auto& r : traj.inner) {
        const auto nodes = r.state.size() / dim;
        for (Eigen::Index i = 0; i < nodes; ++i)
            for (int j = 0; j < dim; ++j) {
                const auto idx = i * dim + j;
                out << r.k << ',' << r.step << ',' << i + 1 << ',' << j + 1 << ',' << r.state(idx) << ','
                    << r.pre_prox(idx) << '\n';
            }
    }
}

} // namespace dpgm
