#include "dpgm/noise.hpp"

#include <cmath>

#include "dpgm/errors.hpp"

namespace dpgm {

GaussianNoise GaussianNoise::isotropic(int size, double mean, double variance) {
    return diagonal(Eigen::VectorXd::Constant(size, mean), Eigen::VectorXd::Constant(size, variance));
}

GaussianNoise GaussianNoise::diagonal(Eigen::VectorXd mean, Eigen::VectorXd variances) {
    if (mean.size() != variances.size()) throw ConfigError("noise mean and variance sizes differ");
    if ((variances.array() < 0.0).any()) throw ConfigError("noise variance must be nonnegative");
    GaussianNoise g;
    g.mean_ = std::move(mean);
    g.std_dev_ = variances.cwiseSqrt();
    g.trace_ = variances.sum();
    return g;
}

GaussianNoise GaussianNoise::full(Eigen::VectorXd mean, const Eigen::MatrixXd& covariance) {
    if (covariance.rows() != mean.size() || covariance.cols() != mean.size())
        throw ConfigError("noise covariance shape does not match mean");
    if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + covariance.cwiseAbs().maxCoeff()))
        throw ConfigError("noise covariance must be symmetric");
    // LDLT tolerates semidefinite covariances.
    Eigen::LDLT<Eigen::MatrixXd> ldlt(covariance);
    if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() < -1e-12).any())
        throw ConfigError("noise covariance must be positive semidefinite");
    GaussianNoise g;
    g.mean_ = std::move(mean);
    const Eigen::VectorXd d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXd l = ldlt.matrixL();
    g.factor_ = ldlt.transpositionsP().transpose() * l * d.asDiagonal();
    g.trace_ = covariance.trace();
    return g;
}

Eigen::VectorXd GaussianNoise::sample(Rng& rng) const {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd z(mean_.size());
    for (auto& v : z) v = normal(rng);
    if (factor_.size() > 0) return mean_ + factor_ * z;
    return mean_ + std_dev_.cwiseProduct(z);
}

double GaussianNoise::moment_bound() const { return std::sqrt(trace_ + mean_.squaredNorm()); }

double moment_bound(const Eigen::VectorXd& mean, const Eigen::MatrixXd& covariance) {
    return std::sqrt(covariance.trace() + mean.squaredNorm());
}

NoiseDraw NoiseDraw::zero(int size) {
    return {Eigen::VectorXd::Zero(size), Eigen::VectorXd::Zero(size), Eigen::VectorXd::Zero(size)};
}

NoiseDraw draw(const NoiseModel& model, int size, Rng& rng) {
    NoiseDraw d = NoiseDraw::zero(size);
    if (model.state) d.state = model.state->sample(rng);
    if (model.gradient) d.gradient = model.gradient->sample(rng);
    if (model.prox) d.prox = model.prox->sample(rng);
    return d;
}

} // namespace dpgm
