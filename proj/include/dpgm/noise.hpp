#pragma once

#include <optional>
#include <random>

#include <Eigen/Dense>

namespace dpgm {

using Rng = std::mt19937_64;

/// Gaussian error source with mean mu and covariance Sigma (diagonal or full).
class GaussianNoise {
public:
    /// Independent components with common mean and variance.
    static GaussianNoise isotropic(int size, double mean, double variance);
    static GaussianNoise diagonal(Eigen::VectorXd mean, Eigen::VectorXd variances);
    /// Full covariance; must be symmetric positive semidefinite.
    static GaussianNoise full(Eigen::VectorXd mean, const Eigen::MatrixXd& covariance);

    Eigen::VectorXd sample(Rng& rng) const;
    int size() const { return static_cast<int>(mean_.size()); }
    const Eigen::VectorXd& mean() const { return mean_; }
    double trace() const { return trace_; }

    /// sqrt(tr(Sigma) + ||mu||^2), an upper bound on E||e|| for any finite-moment e.
    double moment_bound() const;

private:
    GaussianNoise() = default;

    Eigen::VectorXd mean_;
    Eigen::VectorXd std_dev_;   // used when factor_ is empty
    Eigen::MatrixXd factor_;    // lower Cholesky-type factor for full covariance
    double trace_ = 0.0;
};

/// Moment bound from first and second moments alone.
double moment_bound(const Eigen::VectorXd& mean, const Eigen::MatrixXd& covariance);

/// The three additive error sources: state (before mixing), gradient, and
/// proximal output. Missing sources are exact.
struct NoiseModel {
    std::optional<GaussianNoise> state;
    std::optional<GaussianNoise> gradient;
    std::optional<GaussianNoise> prox;

    bool exact() const { return !state && !gradient && !prox; }
    double eta_state() const { return state ? state->moment_bound() : 0.0; }
    double eta_gradient() const { return gradient ? gradient->moment_bound() : 0.0; }
    double eta_prox() const { return prox ? prox->moment_bound() : 0.0; }
    /// eta_s + alpha * eta_g + eta_p
    double combined_eta(double alpha) const { return eta_state() + alpha * eta_gradient() + eta_prox(); }
};

/// One realization of the three error sources for a single iteration.
struct NoiseDraw {
    Eigen::VectorXd state;
    Eigen::VectorXd gradient;
    Eigen::VectorXd prox;

    static NoiseDraw zero(int size);
};

NoiseDraw draw(const NoiseModel& model, int size, Rng& rng);

} // namespace dpgm
