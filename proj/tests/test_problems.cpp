#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "dpgm/errors.hpp"
#include "dpgm/problems.hpp"
#include "test_support.hpp"

using namespace dpgm;
using test::vec;

namespace {

Eigen::VectorXd random_vector(int n, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    Eigen::VectorXd v(n);
    for (auto& x : v) x = normal(rng);
    return v;
}

LeastSquaresCost random_cost(int rows, int cols, std::mt19937_64& rng) {
    Eigen::MatrixXd a(rows, cols);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) a(i, j) = normal(rng);
    return LeastSquaresCost(a, random_vector(rows, rng));
}

} // namespace

TEST_CASE("soft-threshold closed form") {
    const auto out = l1_prox(vec({0.5, -0.02, 0.0}), 0.1 * 0.01);
    CHECK(out(0) == doctest::Approx(0.499).epsilon(1e-14));
    CHECK(out(1) == doctest::Approx(-0.019).epsilon(1e-14));
    CHECK(out(2) == 0.0);
    CHECK(l1_prox(Eigen::VectorXd::Zero(5), 0.7).isZero(0.0));
    CHECK(l1_prox(vec({0.3}), 0.5)(0) == 0.0);
}

TEST_CASE("L1 subgradient picks the sign and zero at the kink") {
    const auto s = l1_subgradient(vec({1.0, -2.0}), 0.01);
    CHECK(s(0) == doctest::Approx(0.01));
    CHECK(s(1) == doctest::Approx(-0.01));
    CHECK(l1_subgradient(vec({0.0}), 0.01)(0) == 0.0);
    std::mt19937_64 rng(3);
    const L1Norm g(0.01);
    for (int trial = 0; trial < 50; ++trial) {
        const auto x = random_vector(4, rng);
        CHECK(g.subgradient(x).norm() <= 0.02 + 1e-15);
        CHECK(g.subgradient(x).norm() <= g.lipschitz(4) + 1e-15);
    }
}

TEST_CASE("least-squares gradient matches central differences") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const auto f = random_cost(7, 4, rng);
        const auto x = random_vector(4, rng);
        const auto g = f.gradient(x);
        const double h = 1e-6;
        Eigen::VectorXd fd(4);
        for (int j = 0; j < 4; ++j) {
            Eigen::VectorXd e = Eigen::VectorXd::Zero(4);
            e(j) = h;
            fd(j) = (f.value(x + e) - f.value(x - e)) / (2 * h);
        }
        CHECK((fd - g).norm() <= 1e-5 * std::max(1.0, g.norm()));
    }
}

TEST_CASE("strong convexity and smoothness sandwich") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        const auto f = random_cost(9, 5, rng);
        const auto x = random_vector(5, rng);
        const auto y = random_vector(5, rng);
        const double inner = (f.gradient(x) - f.gradient(y)).dot(x - y);
        const double dist2 = (x - y).squaredNorm();
        CHECK(inner >= f.strong_convexity() * dist2 * (1 - 1e-12));
        CHECK(inner <= f.smoothness() * dist2 * (1 + 1e-12));
    }
}

TEST_CASE("prox output satisfies the implicit-update inclusion") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> unif(0.01, 2.0);
    const L1Norm g(0.3);
    for (int trial = 0; trial < 200; ++trial) {
        const auto y = random_vector(6, rng, 0.5);
        const double step = unif(rng);
        const auto x = g.prox(y, step);
        const Eigen::VectorXd s = (y - x) / step;
        for (int j = 0; j < 6; ++j) {
            if (x(j) != 0.0) {
                CHECK(s(j) == doctest::Approx(std::copysign(0.3, x(j))).epsilon(1e-12));
            } else {
                CHECK(std::abs(s(j)) <= 0.3 + 1e-12);
            }
        }
    }
}

TEST_CASE("prox is nonexpansive") {
    std::mt19937_64 rng(14);
    const L1Norm g(0.2);
    for (int trial = 0; trial < 200; ++trial) {
        const auto y1 = random_vector(5, rng);
        const auto y2 = random_vector(5, rng);
        CHECK((g.prox(y1, 0.7) - g.prox(y2, 0.7)).norm() <= (y1 - y2).norm() + 1e-15);
    }
}

TEST_CASE("aggregate constants take max and min over nodes") {
    std::vector<LeastSquaresCost> f;
    f.emplace_back(Eigen::Vector2d(std::sqrt(2.0), 1.0).asDiagonal().toDenseMatrix(), Eigen::Vector2d::Zero());
    f.emplace_back(Eigen::Vector2d(std::sqrt(5.0), std::sqrt(0.5)).asDiagonal().toDenseMatrix(),
                   Eigen::Vector2d::Zero());
    const ProblemSnapshot p(2, std::move(f), {L1Norm(0.01), L1Norm(0.02)});
    const auto c = aggregate_constants(p);
    CHECK(c.Lf == doctest::Approx(5.0));
    CHECK(c.mf == doctest::Approx(0.5));
    CHECK(c.Lg == doctest::Approx(0.02 * std::sqrt(2.0)));
    CHECK(c.Lg_network == doctest::Approx(std::sqrt(0.0002 + 0.0008)));

    std::vector<LeastSquaresCost> identity;
    identity.emplace_back(Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Zero(3));
    const auto ci = aggregate_constants(ProblemSnapshot(3, std::move(identity), {L1Norm()}));
    CHECK(ci.Lf == doctest::Approx(1.0));
    CHECK(ci.mf == doctest::Approx(1.0));

    std::vector<LeastSquaresCost> flat;
    flat.emplace_back(Eigen::MatrixXd::Ones(1, 2), Eigen::VectorXd::Zero(1));
    CHECK_THROWS_AS(aggregate_constants(ProblemSnapshot(2, std::move(flat), {L1Norm()})), ConfigError);
}

TEST_CASE("sparse regression: conditioning and constants") {
    SparseRegressionParams p;
    p.dim = 2;
    p.rows_per_node = 4;
    p.horizon = 5;
    const auto gen = generate_sparse_regression(3, p, 42);
    for (int k = 0; k <= p.horizon; ++k) {
        for (const auto& f : gen.sequence.at(k).smooth()) {
            CHECK(f.smoothness() / f.strong_convexity() == doctest::Approx(1e4).epsilon(1e-6));
        }
    }
    const auto c = aggregate_constants(gen.sequence);
    CHECK(std::abs(c.Lf - 1.0) <= 1e-8);
    CHECK(std::abs(c.mf - 1e-4) <= 1e-8);
}

TEST_CASE("sparse regression: signal support and phases") {
    SparseRegressionParams p;
    p.dim = 4;
    p.rows_per_node = 8;
    p.horizon = 50;
    const auto gen = generate_sparse_regression(5, p, 7);
    CHECK(gen.scenario.active.size() == 2);
    for (const auto& y : gen.scenario.signal) CHECK((y.array() != 0.0).count() == 2);
    for (std::size_t a = 0; a < gen.scenario.active.size(); ++a) {
        const double phi = gen.scenario.phases(static_cast<Eigen::Index>(a));
        CHECK(phi >= 0.0);
        CHECK(phi <= M_PI);
        CHECK(gen.scenario.signal[0](gen.scenario.active[a]) == doctest::Approx(std::sin(phi)));
        CHECK(gen.scenario.signal[10](gen.scenario.active[a]) == doctest::Approx(std::sin(0.5 * 0.1 + phi)));
    }
}

TEST_CASE("sparse regression: measurements and determinism") {
    SparseRegressionParams p;
    p.dim = 3;
    p.rows_per_node = 6;
    p.horizon = 3;
    p.noise_variance = 0.0;
    const auto gen = generate_sparse_regression(2, p, 5);
    for (int k = 0; k <= 3; ++k)
        for (const auto& f : gen.sequence.at(k).smooth())
            CHECK((f.matrix() * gen.scenario.signal[k] - f.rhs()).norm() < 1e-13);

    const auto again = generate_sparse_regression(2, p, 5);
    CHECK(again.sequence.at(3).smooth()[1].matrix() == gen.sequence.at(3).smooth()[1].matrix());
    const auto other = generate_sparse_regression(2, p, 6);
    CHECK(other.sequence.at(3).smooth()[1].matrix() != gen.sequence.at(3).smooth()[1].matrix());

    p.time_varying = false;
    const auto fixed = generate_sparse_regression(2, p, 5);
    CHECK(fixed.sequence.is_static());
    CHECK(&fixed.sequence.at(0) == &fixed.sequence.at(3));
}

TEST_CASE("sparse regression rejects underdetermined local costs") {
    SparseRegressionParams p;
    p.dim = 8;
    p.rows_per_node = 7;
    CHECK_THROWS_AS(generate_sparse_regression(3, p, 1), ConfigError);
    p.rows_per_node = 16;
    p.horizon = 0;
    CHECK_THROWS_AS(generate_sparse_regression(3, p, 1), ConfigError);
}

TEST_CASE("problem dump replays exactly") {
    SparseRegressionParams p;
    p.dim = 3;
    p.rows_per_node = 5;
    p.horizon = 4;
    const auto gen = generate_sparse_regression(3, p, 9);
    std::stringstream ss;
    write_problem(ss, gen.sequence);
    const auto back = read_problem(ss);
    CHECK(back.horizon() == 4);
    CHECK(back.node_count() == 3);
    for (int k = 0; k <= 4; ++k)
        for (int i = 0; i < 3; ++i) {
            CHECK(back.at(k).smooth()[i].matrix() == gen.sequence.at(k).smooth()[i].matrix());
            CHECK(back.at(k).smooth()[i].rhs() == gen.sequence.at(k).smooth()[i].rhs());
            CHECK(back.at(k).nonsmooth()[i].weight() == gen.sequence.at(k).nonsmooth()[i].weight());
        }
    std::stringstream bad("not-a-dump 1 2 3");
    CHECK_THROWS_AS(read_problem(bad), ConfigError);
}
