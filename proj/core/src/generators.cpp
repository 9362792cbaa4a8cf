#include "nlforms/generators.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace nlforms {

GeneratorMatrix build_generator(const DiscreteStateSpace& space, const FormConfig& cfg) {
    cfg.validate();
    const long n = space.size();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (long x = 0; x < n; ++x) {
        double diag = 0.0;
        for (long y = 0; y < n; ++y) {
            if (y == x) continue;
            const double k = kernel_value(cfg, space.distance(x, y));
            const double rate = 2.0 * k * space.mu[static_cast<std::size_t>(y)];
            a(x, y) = -rate;
            diag += rate;
        }
        a(x, x) = diag;
    }
    return GeneratorMatrix{std::move(a), space};
}

double weighted_inner(const DiscreteStateSpace& space, const Eigen::VectorXd& a,
                      const Eigen::VectorXd& b) {
    if (a.size() != space.size() || b.size() != space.size())
        throw std::invalid_argument("weighted_inner: length mismatch");
    double acc = 0.0;
    for (long x = 0; x < space.size(); ++x)
        acc += space.mu[static_cast<std::size_t>(x)] * a(x) * b(x);
    return acc;
}

Eigen::MatrixXd semigroup(const GeneratorMatrix& gen, double t) {
    if (t < 0.0) throw std::invalid_argument("semigroup: t must be >= 0");
    const long n = gen.space.size();
    Eigen::VectorXd sqrt_mu(n), inv_sqrt_mu(n);
    for (long x = 0; x < n; ++x) {
        const double m = gen.space.mu[static_cast<std::size_t>(x)];
        sqrt_mu(x) = std::sqrt(m);
        inv_sqrt_mu(x) = 1.0 / sqrt_mu(x);
    }
    // B = D^(1/2) A D^(-1/2) is symmetric because mu(x) A(x,y) = mu(y) A(y,x).
    Eigen::MatrixXd b = sqrt_mu.asDiagonal() * gen.a * inv_sqrt_mu.asDiagonal();
    b = 0.5 * (b + b.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b);
    if (es.info() != Eigen::Success) throw std::runtime_error("semigroup: eigensolver failed");
    Eigen::VectorXd decayed = (-t * es.eigenvalues().array()).exp().matrix();
    Eigen::MatrixXd expb =
        es.eigenvectors() * decayed.asDiagonal() * es.eigenvectors().transpose();
    return inv_sqrt_mu.asDiagonal() * expb * sqrt_mu.asDiagonal();
}

double check_invariance(const Eigen::VectorXd& mu, const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols() || mu.size() != m.rows())
        throw std::invalid_argument("check_invariance: shape mismatch");
    constexpr double stochastic_tol = 1e-9;
    for (long x = 0; x < m.rows(); ++x) {
        if (std::abs(m.row(x).sum() - 1.0) > stochastic_tol)
            throw std::invalid_argument("check_invariance: matrix is not row-stochastic");
        for (long y = 0; y < m.cols(); ++y)
            if (m(x, y) < -stochastic_tol)
                throw std::invalid_argument("check_invariance: negative transition probability");
    }
    const Eigen::RowVectorXd residual = mu.transpose() * m - mu.transpose();
    return residual.cwiseAbs().maxCoeff();
}

ToyModel toy_model(double p, double t) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("toy_model: p must be in (0, 1)");
    if (t < 0.0) throw std::invalid_argument("toy_model: t must be >= 0");

    ToyModel out;
    out.a << 2.0 * (1.0 - p), 2.0 * (p - 1.0), -2.0 * p, 2.0 * p;

    Eigen::Matrix2d stationary, transient;
    stationary << p, 1.0 - p, p, 1.0 - p;
    transient << 1.0 - p, p - 1.0, -p, p;
    out.mt_closed = stationary + std::exp(-2.0 * t) * transient;

    const DiscreteStateSpace space({{0.5}, {-0.5}}, {p, 1.0 - p});
    FormConfig cfg;
    cfg.profile = KernelProfile::stable;  // unit distance, exponent irrelevant
    out.mt_numeric = semigroup(build_generator(space, cfg), t);
    return out;
}

Eigen::MatrixXd metropolis_quantize(const Eigen::VectorXd& mu, const Eigen::MatrixXd& proposal) {
    const long n = mu.size();
    if (proposal.rows() != n || proposal.cols() != n)
        throw std::invalid_argument("metropolis_quantize: shape mismatch");
    double total = 0.0;
    for (long x = 0; x < n; ++x) {
        if (!(mu(x) > 0.0))
            throw std::invalid_argument("metropolis_quantize: mu must be strictly positive");
        total += mu(x);
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("metropolis_quantize: mu must sum to 1");
    for (long x = 0; x < n; ++x) {
        if (std::abs(proposal.row(x).sum() - 1.0) > 1e-12)
            throw std::invalid_argument("metropolis_quantize: proposal must be row-stochastic");
        for (long y = 0; y < n; ++y) {
            if (proposal(x, y) < 0.0)
                throw std::invalid_argument("metropolis_quantize: proposal has negative entries");
            if (proposal(x, y) != proposal(y, x))
                throw std::invalid_argument("metropolis_quantize: proposal must be symmetric");
        }
    }

    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (long x = 0; x < n; ++x) {
        double off = 0.0;
        for (long y = 0; y < n; ++y) {
            if (y == x) continue;
            // min(1, ratio) evaluated branch-wise so the accepted direction
            // carries no rounding at all.
            const double acc = mu(y) >= mu(x) ? 1.0 : mu(y) / mu(x);
            m(x, y) = proposal(x, y) * acc;
            off += m(x, y);
        }
        m(x, x) = 1.0 - off;
    }
    return m;
}

}  // namespace nlforms
