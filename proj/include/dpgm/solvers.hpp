#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dpgm/network.hpp"
#include "dpgm/noise.hpp"
#include "dpgm/problems.hpp"

namespace dpgm {

enum class Algorithm { DPGM, PG_EXTRA, NIDS };

Algorithm parse_algorithm(const std::string& name);
std::string algorithm_name(Algorithm a);

enum class StepSizeCheck { Off, Warn, Strict };

struct SolverConfig {
    double alpha = 0.1;
    int inner_steps = 1;  ///< M_o
    Algorithm algorithm = Algorithm::DPGM;
    std::uint64_t seed = 0;
    std::optional<Eigen::VectorXd> initial_state;  ///< x(t_0); zero when unset
    bool record_inner = false;
    double divergence_threshold = 1e12;
    /// Applies to DPGM only; baselines have their own step-size rules.
    StepSizeCheck step_size_check = StepSizeCheck::Off;
};

/// One proximal-gradient iteration: the pre-prox point and the new state.
struct StepResult {
    Eigen::VectorXd pre_prox;
    Eigen::VectorXd state;
};

/// y = W(x + e_s) - alpha (grad f(x) + e_g);  x+ = prox_{alpha g}(y) + e_p.
/// Throws NumericError if the result is not finite.
StepResult dpgm_step(const Eigen::VectorXd& x, const ProblemSnapshot& problem, const ConsensusNetwork& net,
                     double alpha, const NoiseDraw& noise);

/// Internal state shared by the PG-EXTRA and NIDS recursions. `z` is the pre-prox
/// iterate; `sent_prev` is the (noisy) vector communicated at the previous iteration
/// and `gradient_prev` the (noisy) gradient used there, kept across cost changes.
struct BaselineState {
    Eigen::VectorXd x;
    Eigen::VectorXd x_prev;
    Eigen::VectorXd z;
    Eigen::VectorXd sent_prev;
    Eigen::VectorXd gradient_prev;
    bool started = false;

    static BaselineState at(Eigen::VectorXd x0);
};

/// PG-EXTRA with W~ = (I + W)/2. First call: z = W x - alpha grad f(x).
void pg_extra_step(BaselineState& s, const ProblemSnapshot& problem, const ConsensusNetwork& net, double alpha,
                   const NoiseDraw& noise);

/// NIDS with W~ = (I + W)/2. First call: z = x - alpha grad f(x).
void nids_step(BaselineState& s, const ProblemSnapshot& problem, const ConsensusNetwork& net, double alpha,
               const NoiseDraw& noise);

struct InnerRecord {
    int k = 0;
    int step = 0;  ///< index l of the produced iterate x^l (1..M_o)
    Eigen::VectorXd state;
    Eigen::VectorXd pre_prox;
    Eigen::VectorXd prox_error;
};

struct SolverTrajectory {
    std::vector<Eigen::VectorXd> states;  ///< x(t_0), ..., x(t_K); truncated on divergence
    std::vector<InnerRecord> inner;
    bool diverged = false;
    int diverged_at = -1;
};

/// Online loop: for k = 1..K warm-start from x(t_{k-1}), run M_o inner steps of the
/// selected algorithm against the cost at t_k and store x(t_k). Deterministic
/// under (config.seed, config, problem).
SolverTrajectory run_online(const ProblemSequence& problem, const ConsensusNetwork& net, const SolverConfig& config,
                            const NoiseModel& noise);

/// CSV with columns k,l,node,component,x,y from recorded inner iterates.
void write_iterates_csv(std::ostream& out, const SolverTrajectory& traj, int dim);

} // namespace dpgm
