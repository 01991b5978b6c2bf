#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "dpgm/bounds.hpp"

using namespace dpgm;

namespace {

TheoryConstants diagonal_constants(double c, double rho, double zeta, double alpha, double Lf) {
    TheoryConstants k;
    k.c = c;
    k.rho = rho;
    k.zeta_phi = zeta;
    k.alpha = alpha;
    k.Lf = Lf;
    k.delta = std::max({c, rho, zeta});
    return k;
}

} // namespace

TEST_CASE("step-size conditions") {
    auto s = check_step_size(0.5, 1.0, 0.5, 0.0);
    CHECK(s.relaxed_ok);
    CHECK(s.prop_ok);
    CHECK(make_constants(0.5, 1.0, 0.5, 0.0, 0.5).alpha_max_prop == doctest::Approx(1.0));
    s = check_step_size(0.0, 1.0, 0.5, 0.0);
    CHECK_FALSE(s.relaxed_ok);
    CHECK_FALSE(s.prop_ok);
    // relaxed bound ~ 5e-10 for a nearly bipartite graph
    const auto k = make_constants(1e-10, 2.0, 2.0, -1.0 + 1e-9, 0.9);
    CHECK(k.alpha_max_relaxed == doctest::Approx(5e-10).epsilon(1e-6));
    CHECK(check_step_size(4e-10, 2.0, 2.0, -1.0 + 1e-9).prop_ok);
    CHECK_FALSE(check_step_size(6e-10, 2.0, 2.0, -1.0 + 1e-9).relaxed_ok);
    // relaxed bound 1.5, but 2/(Lf+mf) = 4/3 binds
    s = check_step_size(1.4, 1.0, 0.5, 0.5);
    CHECK(s.relaxed_ok);
    CHECK_FALSE(s.prop_ok);
}

TEST_CASE("theory constants follow their definitions") {
    const auto k = make_constants(0.3, 2.0, 0.5, -0.2, 0.8);
    CHECK(k.L_phi == doctest::Approx(1.0 + 0.2 + 0.6));
    CHECK(k.m_phi == doctest::Approx(0.15));
    CHECK(k.zeta_phi == doctest::Approx(std::max(0.8, 0.85)));
    CHECK(k.c == doctest::Approx(std::sqrt(1.0 - 2.0 * 0.3 * 1.0 / 2.5)));
    CHECK(k.delta == doctest::Approx(std::max({k.c, 0.8, k.zeta_phi})));
}

TEST_CASE("static bound step") {
    const auto zero = make_constants(0.1, 1.0, 1.0, 0.0, 0.5);
    CHECK(static_bound_step(Eigen::Vector3d::Zero(), zero, 0.0, 0.0, 0.0).isZero(0.0));

    const auto k = diagonal_constants(0.5774, 2.0 / 3, 0.75, 0.5, 2.0);
    const auto d = static_bound_step(Eigen::Vector3d::Ones(), k, 0.0, 0.0, 0.0);
    CHECK(d(0) == doctest::Approx(1.5774));
    CHECK(d(1) == doctest::Approx(1.0 + 2.0 / 3));
    CHECK(d(2) == doctest::Approx(0.75));
    CHECK(output_bound(d) == doctest::Approx(d(0) + d(1)));

    const auto with_input = static_bound_step(Eigen::Vector3d::Zero(), k, 0.1, 0.2, 0.01);
    CHECK(with_input(0) == doctest::Approx(2 * 0.5 * 0.1 + 0.01));
    CHECK(with_input(1) == doctest::Approx(2 * 0.5 * 0.1 + 0.2 + 0.01));
    CHECK(with_input(2) == doctest::Approx(0.01));
}

TEST_CASE("online bound step") {
    const auto k = make_constants(0.4, 1.0, 0.2, -0.1, 0.7);
    const Eigen::Vector3d d(0.3, 0.2, 0.5);
    // Mo = 1 and sigma = 0 reduce to the static step with sigma' as the consensus gap
    CHECK((online_bound_step(d, 1, k, 0.05, 0.0, 0.1, 0.02) - static_bound_step(d, k, 0.05, 0.1, 0.02)).norm() <
          1e-15);
    // homogeneous system is a pure contraction
    const Eigen::Matrix3d a = error_matrix(k);
    CHECK((online_bound_step(d, 3, k, 0.0, 0.0, 0.0, 0.0) - a * a * a * d).norm() < 1e-15);
}

TEST_CASE("composed input against the geometric-series closed form") {
    const double delta = 0.8, alpha = 0.3, lg = 0.1, sigma = 0.05, sigma_p = 0.02, eta = 0.01;
    const auto k = diagonal_constants(delta, delta, delta, alpha, 0.0);  // alpha Lf = 0 -> A = delta I
    for (int mo : {1, 2, 5, 17}) {
        const Eigen::Vector3d u(2 * alpha * lg + eta, 2 * alpha * lg + sigma_p + eta, eta);
        const double dm = std::pow(delta, mo);
        const Eigen::Vector3d expected = (1 - dm) / (1 - delta) * u + dm * sigma * Eigen::Vector3d(1, 0, 1);
        CHECK((composed_input(k, mo, lg, sigma, sigma_p, eta) - expected).norm() < 1e-14);
    }
}

TEST_CASE("asymptotic bound values") {
    const auto k0 = make_constants(0.1, 1.0, 0.5, 0.0, 0.5);
    CHECK(asymptotic_bound(k0, 3, 0.0, 0.0, 0.0, 0.0) == 0.0);

    auto k = diagonal_constants(0.5, 0.5, 0.5, 0.1, 1.0);
    CHECK(asymptotic_bound(k, 1, 0.0, 1.0, 0.0, 0.0) == doctest::Approx(1.0));

    // plateau: large Mo approaches (4 alpha Lg + sigma' + 2 eta) / (1 - delta)
    const double plateau = (4 * 0.1 * 0.2 + 0.05 + 2 * 0.01) / (1 - 0.5);
    CHECK(asymptotic_bound(k, 50, 0.2, 1.0, 0.05, 0.01) == doctest::Approx(plateau).epsilon(1e-12));

    k.delta = 1.0;
    CHECK_THROWS_AS(asymptotic_bound(k, 1, 0.0, 1.0, 0.0, 0.0), std::domain_error);
}

TEST_CASE("asymptotic bound monotonicity") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const auto k = make_constants(0.05 + 0.5 * u(rng), 1.0, 0.1 + 0.5 * u(rng), -0.3 * u(rng), 0.2 + 0.7 * u(rng));
        if (!(k.delta < 1.0)) continue;
        const double lg = u(rng), s = u(rng), sp = u(rng), eta = u(rng);
        double prev = asymptotic_bound(k, 1, lg, s, sp, eta);
        for (int mo = 2; mo <= 40; ++mo) {
            const double cur = asymptotic_bound(k, mo, lg, s, sp, eta);
            CHECK(cur <= prev * (1 + 1e-12));
            prev = cur;
        }
        const double base = asymptotic_bound(k, 3, lg, s, sp, eta);
        CHECK(asymptotic_bound(k, 3, lg + 0.1, s, sp, eta) >= base);
        CHECK(asymptotic_bound(k, 3, lg, s + 0.1, sp, eta) >= base);
        CHECK(asymptotic_bound(k, 3, lg, s, sp + 0.1, eta) >= base);
        CHECK(asymptotic_bound(k, 3, lg, s, sp, eta + 0.1) >= base);
    }
}

TEST_CASE("system matrix eigenvalues are its diagonal and stable under the step-size condition") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int checked = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const double Lf = 0.5 + 2 * u(rng), mf = Lf * (0.01 + 0.99 * u(rng));
        const double lmin = -0.9 * u(rng), rho = 0.05 + 0.9 * u(rng);
        const auto bound = make_constants(1.0, Lf, mf, lmin, rho).alpha_max_prop;
        const double alpha = bound * (0.01 + 0.98 * u(rng));
        REQUIRE(check_step_size(alpha, Lf, mf, lmin).prop_ok);
        const auto k = make_constants(alpha, Lf, mf, lmin, rho);
        const Eigen::Matrix3d a = error_matrix(k);
        Eigen::Vector3d eig = a.eigenvalues().real();
        std::sort(eig.data(), eig.data() + 3);
        Eigen::Vector3d diag = a.diagonal();
        std::sort(diag.data(), diag.data() + 3);
        CHECK((eig - diag).norm() < 1e-12);
        CHECK(k.c < 1.0);
        CHECK(k.zeta_phi < 1.0);
        CHECK(k.delta < 1.0);
        ++checked;
    }
    CHECK(checked == 500);
}

TEST_CASE("per-source noise form equals the combined form") {
    const auto k = make_constants(0.37, 1.0, 0.3, -0.1, 0.6);
    for (const NoiseTriplet t : {NoiseTriplet{0.1, 0.0, 0.0}, NoiseTriplet{0.0, 0.1, 0.0}, NoiseTriplet{0.0, 0.0, 0.1},
                                 NoiseTriplet{0.02, 0.3, 0.05}}) {
        const double combined = t.eta_state + 0.37 * t.eta_gradient + t.eta_prox;
        CHECK(std::abs(asymptotic_bound(k, 4, 0.02, 0.01, 0.03, t) -
                       asymptotic_bound(k, 4, 0.02, 0.01, 0.03, combined)) <= 1e-12);
    }
}

TEST_CASE("empirical error vector") {
    const Eigen::Vector2d x(1.0, 3.0);
    const Eigen::VectorXd xs = Eigen::VectorXd::Constant(1, 2.0);
    const Eigen::Vector2d xt(1.5, 2.5);
    const auto d = empirical_error_vector(x, xs, xt, 1);
    CHECK(d(0) == doctest::Approx(0.0));
    CHECK(d(1) == doctest::Approx(std::sqrt(2.0)));
    CHECK(d(2) == doctest::Approx(std::sqrt(0.5)));

    const Eigen::Vector2d at_opt(2.0, 2.0);
    const auto d2 = empirical_error_vector(at_opt, xs, xt, 1);
    CHECK(d2(0) == 0.0);
    CHECK(d2(1) == 0.0);
    CHECK(d2(2) == doctest::Approx((at_opt - xt).norm()));
    CHECK(empirical_error_vector(xt, xs, xt, 1)(2) == 0.0);
}

TEST_CASE("bound trace iterates the online recursion") {
    const auto k = make_constants(0.2, 1.0, 0.5, 0.0, 0.6);
    const Eigen::Vector3d d0(1.0, 0.5, 2.0);
    const auto trace = online_bound_trace(d0, 5, 3, k, 0.1, 0.01, 0.02, 0.001);
    REQUIRE(trace.size() == 6);
    Eigen::Vector3d d = d0;
    for (int s = 1; s <= 5; ++s) {
        d = online_bound_step(d, 3, k, 0.1, 0.01, 0.02, 0.001);
        CHECK((trace[s] - d).norm() < 1e-14);
    }
}
