#include "dpgm/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "dpgm/stacked.hpp"

namespace dpgm {

TheoryConstants make_constants(double alpha, double Lf, double mf, double lambda_min, double rho) {
    TheoryConstants k;
    k.alpha = alpha;
    k.Lf = Lf;
    k.mf = mf;
    k.lambda_min = lambda_min;
    k.rho = rho;
    k.L_phi = 1.0 - lambda_min + alpha * Lf;
    k.m_phi = alpha * mf;
    k.zeta_phi = std::max(std::abs(1.0 - k.L_phi), std::abs(1.0 - k.m_phi));
    k.c = std::sqrt(std::max(0.0, 1.0 - 2.0 * alpha * mf * Lf / (mf + Lf)));
    k.delta = std::max({k.c, rho, k.zeta_phi});
    k.alpha_max_relaxed = (1.0 + lambda_min) / Lf;
    k.alpha_max_prop = std::min(k.alpha_max_relaxed, 2.0 / (Lf + mf));
    return k;
}

StepSizeStatus check_step_size(double alpha, double Lf, double mf, double lambda_min) {
    const double relaxed = (1.0 + lambda_min) / Lf;
    const double prop = std::min(relaxed, 2.0 / (Lf + mf));
    return {alpha > 0.0 && alpha < relaxed, alpha > 0.0 && alpha < prop};
}

double suggest_step_size(double Lf, double mf, double lambda_min) {
    return 0.9 * std::min((1.0 + lambda_min) / Lf, 2.0 / (Lf + mf));
}

Eigen::Matrix3d error_matrix(const TheoryConstants& k) {
    Eigen::Matrix3d a;
    a << k.c, k.alpha * k.Lf, 0.0,
         0.0, k.rho, k.alpha * k.Lf,
         0.0, 0.0, k.zeta_phi;
    return a;
}

Eigen::Vector3d bound_input(const TheoryConstants& k, double Lg, double consensus_gap) {
    const double g = 2.0 * k.alpha * Lg;
    return {g, g + consensus_gap, 0.0};
}

Eigen::Vector3d static_bound_step(const Eigen::Vector3d& d, const TheoryConstants& k, double Lg,
                                  double consensus_gap, double eta) {
    return error_matrix(k) * d + bound_input(k, Lg, consensus_gap) + Eigen::Vector3d::Constant(eta);
}

Eigen::Vector3d composed_input(const TheoryConstants& k, int inner_steps, double Lg, double sigma,
                               double sigma_prime, double eta) {
    if (inner_steps < 1) throw std::invalid_argument("inner_steps must be >= 1");
    const Eigen::Matrix3d a = error_matrix(k);
    const Eigen::Vector3d per_step = bound_input(k, Lg, sigma_prime) + Eigen::Vector3d::Constant(eta);
    // Horner form of sum_{l<Mo} A^{Mo-l-1} u, accumulating A^Mo alongside.
    Eigen::Vector3d acc = Eigen::Vector3d::Zero();
    Eigen::Matrix3d power = Eigen::Matrix3d::Identity();
    for (int l = 0; l < inner_steps; ++l) {
        acc = a * acc + per_step;
        power = a * power;
    }
    return acc + power * Eigen::Vector3d(sigma, 0.0, sigma);
}

Eigen::Vector3d online_bound_step(const Eigen::Vector3d& d, int inner_steps, const TheoryConstants& k, double Lg,
                                  double sigma, double sigma_prime, double eta) {
    Eigen::Matrix3d power = Eigen::Matrix3d::Identity();
    const Eigen::Matrix3d a = error_matrix(k);
    for (int l = 0; l < inner_steps; ++l) power = a * power;
    return power * d + composed_input(k, inner_steps, Lg, sigma, sigma_prime, eta);
}

double asymptotic_bound(const TheoryConstants& k, int inner_steps, double Lg, double sigma, double sigma_prime,
                        double eta) {
    if (!(k.delta < 1.0)) throw std::domain_error("asymptotic bound undefined for delta >= 1");
    if (inner_steps < 1) throw std::invalid_argument("inner_steps must be >= 1");
    const double dm = std::pow(k.delta, inner_steps);
    const double geometric = (1.0 - dm * k.delta) / (1.0 - k.delta);
    return (sigma * dm + geometric * (4.0 * k.alpha * Lg + sigma_prime + 2.0 * eta)) / (1.0 - dm);
}

double asymptotic_bound(const TheoryConstants& k, int inner_steps, double Lg, double sigma, double sigma_prime,
                        const NoiseTriplet& eta) {
    return asymptotic_bound(k, inner_steps, Lg, sigma, sigma_prime,
                            eta.eta_state + k.alpha * eta.eta_gradient + eta.eta_prox);
}

Eigen::Vector3d empirical_error_vector(const Eigen::VectorXd& x, const Eigen::VectorXd& x_star,
                                       const Eigen::VectorXd& x_tilde, int dim) {
    const auto nodes = static_cast<int>(x.size() / dim);
    const Eigen::VectorXd avg = consensus_average(x, dim);
    return {(avg - lift(x_star, nodes)).norm(), (x - avg).norm(), (x - x_tilde).norm()};
}

std::vector<Eigen::Vector3d> online_bound_trace(const Eigen::Vector3d& d0, int steps, int inner_steps,
                                                const TheoryConstants& k, double Lg, double sigma,
                                                double sigma_prime, double eta) {
    Eigen::Matrix3d power = Eigen::Matrix3d::Identity();
    const Eigen::Matrix3d a = error_matrix(k);
    for (int l = 0; l < inner_steps; ++l) power = a * power;
    const Eigen::Vector3d input = composed_input(k, inner_steps, Lg, sigma, sigma_prime, eta);
    std::vector<Eigen::Vector3d> out;
    out.reserve(static_cast<std::size_t>(steps) + 1);
    out.push_back(d0);
    for (int s = 0; s < steps; ++s) out.push_back(power * out.back() + input);
    return out;
}

void write_bound_trace_csv(std::ostream& out, const std::vector<Eigen::Vector3d>& bound,
                           const std::vector<Eigen::Vector3d>& empirical) {
    out << "k,d1_bound,d2_bound,d3_bound,output_bound,d1_emp,d2_emp,d3_emp,output_emp\n";
    out << std::setprecision(10);
    for (std::size_t k = 0; k < bound.size(); ++k) {
        const auto& b = bound[k];
        out << k << ',' << b(0) << ',' << b(1) << ',' << b(2) << ',' << output_bound(b);
        if (k < empirical.size()) {
            const auto& e = empirical[k];
            out << ',' << e(0) << ',' << e(1) << ',' << e(2) << ',' << output_bound(e);
        } else {
            out << ",,,,";
        }
        out << '\n';
    }
}

} // namespace dpgm
