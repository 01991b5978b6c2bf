#include "dpgm/problems.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

#include "dpgm/errors.hpp"

namespace dpgm {

Eigen::VectorXd l1_prox(const Eigen::VectorXd& y, double tau) {
    Eigen::VectorXd out(y.size());
    for (Eigen::Index j = 0; j < y.size(); ++j) {
        const double mag = std::abs(y(j)) - tau;
        out(j) = mag > 0.0 ? std::copysign(mag, y(j)) : 0.0;
    }
    return out;
}

Eigen::VectorXd l1_subgradient(const Eigen::VectorXd& x, double lambda1) {
    Eigen::VectorXd out(x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j)
        out(j) = x(j) > 0.0 ? lambda1 : (x(j) < 0.0 ? -lambda1 : 0.0);
    return out;
}

LeastSquaresCost::LeastSquaresCost(Eigen::MatrixXd a, Eigen::VectorXd b) : a_(std::move(a)), b_(std::move(b)) {
    if (a_.rows() != b_.size()) throw ConfigError("least-squares cost: rows of A must match size of b");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a_.transpose() * a_, Eigen::EigenvaluesOnly);
    strong_convexity_ = solver.eigenvalues()(0);
    smoothness_ = solver.eigenvalues()(solver.eigenvalues().size() - 1);
}

Eigen::VectorXd L1Norm::prox(const Eigen::VectorXd& y, double step) const {
    if (lambda_ == 0.0) return y;
    return l1_prox(y, step * lambda_);
}

double L1Norm::lipschitz(int dim) const { return lambda_ * std::sqrt(static_cast<double>(dim)); }

ProblemSnapshot::ProblemSnapshot(int dim, std::vector<LeastSquaresCost> smooth, std::vector<L1Norm> nonsmooth)
    : dim_(dim), smooth_(std::move(smooth)), nonsmooth_(std::move(nonsmooth)) {
    if (smooth_.empty()) throw ConfigError("problem snapshot needs at least one node");
    if (smooth_.size() != nonsmooth_.size()) throw ConfigError("smooth and nonsmooth cost counts differ");
    for (const auto& f : smooth_)
        if (f.matrix().cols() != dim_) throw ConfigError("local cost dimension mismatch");
}

double ProblemSnapshot::value(const Eigen::VectorXd& x) const {
    double total = 0.0;
    for (int i = 0; i < node_count(); ++i) {
        const Eigen::VectorXd xi = x.segment(i * dim_, dim_);
        total += smooth_[i].value(xi) + nonsmooth_[i].value(xi);
    }
    return total;
}

Eigen::VectorXd ProblemSnapshot::gradient(const Eigen::VectorXd& x) const {
    Eigen::VectorXd out(x.size());
    for (int i = 0; i < node_count(); ++i)
        out.segment(i * dim_, dim_) = smooth_[i].gradient(x.segment(i * dim_, dim_));
    return out;
}

Eigen::VectorXd ProblemSnapshot::prox(const Eigen::VectorXd& y, double step) const {
    Eigen::VectorXd out(y.size());
    for (int i = 0; i < node_count(); ++i)
        out.segment(i * dim_, dim_) = nonsmooth_[i].prox(y.segment(i * dim_, dim_), step);
    return out;
}

Eigen::VectorXd ProblemSnapshot::subgradient(const Eigen::VectorXd& x) const {
    Eigen::VectorXd out(x.size());
    for (int i = 0; i < node_count(); ++i)
        out.segment(i * dim_, dim_) = nonsmooth_[i].subgradient(x.segment(i * dim_, dim_));
    return out;
}

ProblemSequence::ProblemSequence(std::vector<ProblemSnapshot> snapshots, int horizon, double sampling_time)
    : snapshots_(std::move(snapshots)), horizon_(horizon), sampling_time_(sampling_time) {
    if (snapshots_.empty()) throw ConfigError("problem sequence is empty");
    if (horizon_ < 0) throw ConfigError("horizon must be nonnegative");
    if (snapshots_.size() != 1 && static_cast<int>(snapshots_.size()) != horizon_ + 1)
        throw ConfigError("time-varying sequence needs one snapshot per k = 0..K");
    for (const auto& s : snapshots_)
        if (s.node_count() != node_count() || s.dim() != dim())
            throw ConfigError("snapshots disagree on node count or dimension");
}

ProblemSequence ProblemSequence::constant(ProblemSnapshot snapshot, int horizon, double sampling_time) {
    std::vector<ProblemSnapshot> one;
    one.push_back(std::move(snapshot));
    return ProblemSequence(std::move(one), horizon, sampling_time);
}

const ProblemSnapshot& ProblemSequence::at(int k) const {
    if (is_static()) return snapshots_.front();
    if (k < 0 || k > horizon_) throw ConfigError("time index out of range: " + std::to_string(k));
    return snapshots_[static_cast<std::size_t>(k)];
}

ProblemConstants aggregate_constants(const ProblemSnapshot& snapshot) {
    ProblemConstants c;
    c.mf = std::numeric_limits<double>::infinity();
    double lg_squares = 0.0;
    for (int i = 0; i < snapshot.node_count(); ++i) {
        const double lgi = snapshot.nonsmooth()[i].lipschitz(snapshot.dim());
        c.Lf = std::max(c.Lf, snapshot.smooth()[i].smoothness());
        c.mf = std::min(c.mf, snapshot.smooth()[i].strong_convexity());
        c.Lg = std::max(c.Lg, lgi);
        lg_squares += lgi * lgi;
    }
    c.Lg_network = std::sqrt(lg_squares);
    if (!(c.mf > 0.0)) throw ConfigError("local cost is not strongly convex (m_f <= 0)");
    return c;
}

ProblemConstants aggregate_constants(const ProblemSequence& seq) {
    ProblemConstants c = aggregate_constants(seq.snapshots().front());
    for (const auto& s : seq.snapshots()) {
        const auto ck = aggregate_constants(s);
        c.Lf = std::max(c.Lf, ck.Lf);
        c.mf = std::min(c.mf, ck.mf);
        c.Lg = std::max(c.Lg, ck.Lg);
        c.Lg_network = std::max(c.Lg_network, ck.Lg_network);
    }
    return c;
}

namespace {

// Haar-distributed orthonormal columns via QR of a Gaussian matrix with the sign fix.
Eigen::MatrixXd random_orthonormal(int rows, int cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd g(rows, rows);
    for (int j = 0; j < rows; ++j)
        for (int i = 0; i < rows; ++i) g(i, j) = normal(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < rows; ++j)
        if (r(j, j) < 0.0) q.col(j) *= -1.0;
    return q.leftCols(cols);
}

} // namespace

GeneratedProblem generate_sparse_regression(int node_count, const SparseRegressionParams& p, std::uint64_t seed) {
    if (node_count < 1) throw ConfigError("scenario needs at least one node");
    if (p.dim < 1) throw ConfigError("dimension must be positive");
    if (p.rows_per_node < p.dim)
        throw ConfigError("rows_per_node must be >= dim, otherwise the local costs are not strongly convex");
    if (p.horizon < 1) throw ConfigError("horizon must be at least 1");
    if (!(p.condition_number >= 1.0)) throw ConfigError("condition number must be >= 1");
    if (!(p.noise_variance >= 0.0)) throw ConfigError("noise variance must be nonnegative");

    std::mt19937_64 rng(seed);
    SparseRegressionScenario sc;
    sc.params = p;

    std::vector<int> all(p.dim);
    std::iota(all.begin(), all.end(), 0);
    std::sample(all.begin(), all.end(), std::back_inserter(sc.active), p.dim / 2, rng);
    std::uniform_real_distribution<double> phase(0.0, std::numbers::pi);
    sc.phases.resize(static_cast<Eigen::Index>(sc.active.size()));
    for (auto& v : sc.phases) v = phase(rng);

    Eigen::VectorXd singular(p.dim);
    for (int j = 0; j < p.dim; ++j) {
        const double frac = p.dim > 1 ? static_cast<double>(j) / (p.dim - 1) : 0.0;
        singular(j) = p.sigma_max * std::pow(p.condition_number, -frac);
    }

    std::normal_distribution<double> noise(0.0, std::sqrt(p.noise_variance));
    const int steps = p.time_varying ? p.horizon + 1 : 1;
    std::vector<ProblemSnapshot> snapshots;
    snapshots.reserve(steps);
    for (int k = 0; k < steps; ++k) {
        const double t = k * p.sampling_time;
        Eigen::VectorXd y = Eigen::VectorXd::Zero(p.dim);
        for (std::size_t a = 0; a < sc.active.size(); ++a)
            y(sc.active[a]) = std::sin(p.omega * t + sc.phases(static_cast<Eigen::Index>(a)));
        std::vector<LeastSquaresCost> smooth;
        std::vector<L1Norm> nonsmooth;
        smooth.reserve(node_count);
        for (int i = 0; i < node_count; ++i) {
            const Eigen::MatrixXd u = random_orthonormal(p.rows_per_node, p.dim, rng);
            const Eigen::MatrixXd v = random_orthonormal(p.dim, p.dim, rng);
            Eigen::MatrixXd a = u * singular.asDiagonal() * v.transpose();
            Eigen::VectorXd b = a * y;
            for (auto& bj : b) bj += noise(rng);
            smooth.emplace_back(std::move(a), std::move(b));
            nonsmooth.emplace_back(p.lambda1);
        }
        sc.signal.push_back(std::move(y));
        snapshots.emplace_back(p.dim, std::move(smooth), std::move(nonsmooth));
    }
    return {ProblemSequence(std::move(snapshots), p.horizon, p.sampling_time), std::move(sc)};
}

void write_problem(std::ostream& out, const ProblemSequence& seq) {
    const auto& first = seq.at(0).smooth().front();
    const auto rows = first.matrix().rows();
    out << "dpgm-problem " << seq.node_count() << ' ' << seq.dim() << ' ' << rows << ' ' << seq.horizon() << ' '
        << std::setprecision(17) << seq.sampling_time() << ' ' << (seq.is_static() ? 1 : 0) << '\n';
    for (const auto& snap : seq.snapshots()) {
        for (int i = 0; i < snap.node_count(); ++i) {
            const auto& f = snap.smooth()[i];
            if (f.matrix().rows() != rows) throw ConfigError("problem dump needs equal row counts per node");
            out << snap.nonsmooth()[i].weight() << '\n';
            for (Eigen::Index r = 0; r < rows; ++r) {
                for (Eigen::Index c = 0; c < f.matrix().cols(); ++c) out << (c ? " " : "") << f.matrix()(r, c);
                out << '\n';
            }
            for (Eigen::Index r = 0; r < rows; ++r) out << (r ? " " : "") << f.rhs()(r);
            out << '\n';
        }
    }
}

ProblemSequence read_problem(std::istream& in) {
    std::string magic;
    int nodes = 0, dim = 0, rows = 0, horizon = 0, is_static = 0;
    double ts = 0.0;
    if (!(in >> magic >> nodes >> dim >> rows >> horizon >> ts >> is_static) || magic != "dpgm-problem")
        throw ConfigError("problem dump: bad header");
    const int steps = is_static ? 1 : horizon + 1;
    std::vector<ProblemSnapshot> snapshots;
    for (int k = 0; k < steps; ++k) {
        std::vector<LeastSquaresCost> smooth;
        std::vector<L1Norm> nonsmooth;
        for (int i = 0; i < nodes; ++i) {
            double lambda = 0.0;
            Eigen::MatrixXd a(rows, dim);
            Eigen::VectorXd b(rows);
            in >> lambda;
            for (int r = 0; r < rows; ++r)
                for (int c = 0; c < dim; ++c) in >> a(r, c);
            for (int r = 0; r < rows; ++r) in >> b(r);
            if (!in) throw ConfigError("problem dump: truncated at k=" + std::to_string(k));
            smooth.emplace_back(std::move(a), std::move(b));
            nonsmooth.emplace_back(lambda);
        }
        snapshots.emplace_back(dim, std::move(smooth), std::move(nonsmooth));
    }
    return ProblemSequence(std::move(snapshots), horizon, ts);
}

} // namespace dpgm
