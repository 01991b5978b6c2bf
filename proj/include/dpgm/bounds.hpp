#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

namespace dpgm {

/// Constants of the convergence theory for a given step size and problem class.
struct TheoryConstants {
    double alpha = 0.0;
    double Lf = 0.0;
    double mf = 0.0;
    double lambda_min = 0.0;
    double rho = 0.0;
    double L_phi = 0.0;     ///< 1 - lambda_min(W) + alpha Lf
    double m_phi = 0.0;     ///< alpha mf
    double zeta_phi = 0.0;  ///< max{|1 - L_phi|, |1 - m_phi|}
    double c = 0.0;         ///< sqrt(1 - 2 alpha mf Lf / (mf + Lf))
    double delta = 0.0;     ///< max{c, rho, zeta_phi}
    double alpha_max_relaxed = 0.0;  ///< (1 + lambda_min) / Lf
    double alpha_max_prop = 0.0;     ///< min{(1 + lambda_min) / Lf, 2 / (Lf + mf)}
};

TheoryConstants make_constants(double alpha, double Lf, double mf, double lambda_min, double rho);

struct StepSizeStatus {
    bool relaxed_ok = false;  ///< 0 < alpha < (1 + lambda_min) / Lf
    bool prop_ok = false;     ///< additionally alpha < 2 / (Lf + mf)
};

StepSizeStatus check_step_size(double alpha, double Lf, double mf, double lambda_min);

/// 0.9 times the admissible upper bound on alpha; a starting point for tuning.
double suggest_step_size(double Lf, double mf, double lambda_min);

/// Upper-triangular system matrix with diagonal (c, rho, zeta_phi) and
/// alpha Lf on the first superdiagonal.
Eigen::Matrix3d error_matrix(const TheoryConstants& k);

/// [2 alpha Lg, 2 alpha Lg + consensus_gap, 0], with consensus_gap = ||(I - W) x~||.
Eigen::Vector3d bound_input(const TheoryConstants& k, double Lg, double consensus_gap);

/// One step of the static recursion: A d + b + eta 1.
Eigen::Vector3d static_bound_step(const Eigen::Vector3d& d, const TheoryConstants& k, double Lg,
                                  double consensus_gap, double eta);

/// b'' = sum_{l<Mo} A^{Mo-l-1} (bound_input(sigma') + eta 1) + A^{Mo} [sigma, 0, sigma].
Eigen::Vector3d composed_input(const TheoryConstants& k, int inner_steps, double Lg, double sigma,
                               double sigma_prime, double eta);

/// A^{Mo} d + b''.
Eigen::Vector3d online_bound_step(const Eigen::Vector3d& d, int inner_steps, const TheoryConstants& k, double Lg,
                                  double sigma, double sigma_prime, double eta);

/// Bound on ||x - x*||: the sum of the first two entries of d.
inline double output_bound(const Eigen::Vector3d& d) { return d(0) + d(1); }

struct NoiseTriplet {
    double eta_state = 0.0;
    double eta_gradient = 0.0;
    double eta_prox = 0.0;
};

/// Asymptotic tracking-error bound
///   1/(1 - delta^Mo) [sigma delta^Mo + (1 - delta^{Mo+1})/(1 - delta) (4 alpha Lg + sigma' + 2 eta)].
/// Throws std::domain_error when delta >= 1.
double asymptotic_bound(const TheoryConstants& k, int inner_steps, double Lg, double sigma, double sigma_prime,
                        double eta);
/// Same bound with eta = eta_s + alpha eta_g + eta_p.
double asymptotic_bound(const TheoryConstants& k, int inner_steps, double Lg, double sigma, double sigma_prime,
                        const NoiseTriplet& eta);

/// d = [||xbar - 1 x x*||, ||x - xbar||, ||x - x~||] for a stacked state x.
Eigen::Vector3d empirical_error_vector(const Eigen::VectorXd& x, const Eigen::VectorXd& x_star,
                                       const Eigen::VectorXd& x_tilde, int dim);

/// Iterates the online recursion from d(t_0) for `steps` intervals; entry k bounds E[d(t_k)].
std::vector<Eigen::Vector3d> online_bound_trace(const Eigen::Vector3d& d0, int steps, int inner_steps,
                                                const TheoryConstants& k, double Lg, double sigma,
                                                double sigma_prime, double eta);

/// CSV columns k,d1_bound,d2_bound,d3_bound,output_bound,d1_emp,d2_emp,d3_emp,output_emp.
/// `empirical` may be empty, in which case those columns are left blank.
void write_bound_trace_csv(std::ostream& out, const std::vector<Eigen::Vector3d>& bound,
                           const std::vector<Eigen::Vector3d>& empirical);

} // namespace dpgm
