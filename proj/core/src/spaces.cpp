#include "nlforms/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>

namespace nlforms {

namespace {

void check_dim(std::span<const double> x, const WeightedSpaceSpec& space, const char* who) {
    if (static_cast<long>(x.size()) != space.dim())
        throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}

}  // namespace

WeightedSpaceSpec WeightedSpaceSpec::lp(double p, Sequence weights) {
    if (!(p >= 1.0) || std::isinf(p))
        throw std::invalid_argument("WeightedSpaceSpec::lp: p must be finite and >= 1");
    for (double b : weights.values())
        if (b < 0.0) throw std::invalid_argument("WeightedSpaceSpec: weights must be >= 0");
    WeightedSpaceSpec s;
    s.flavor_ = SpaceFlavor::lp;
    s.p_ = p;
    s.dim_ = weights.size();
    s.weights_ = std::move(weights);
    return s;
}

WeightedSpaceSpec WeightedSpaceSpec::linf(Sequence weights) {
    for (double b : weights.values())
        if (b < 0.0) throw std::invalid_argument("WeightedSpaceSpec: weights must be >= 0");
    WeightedSpaceSpec s;
    s.flavor_ = SpaceFlavor::linf;
    s.p_ = std::numeric_limits<double>::infinity();
    s.dim_ = weights.size();
    s.weights_ = std::move(weights);
    return s;
}

WeightedSpaceSpec WeightedSpaceSpec::product(long dim) {
    if (dim < 1) throw std::invalid_argument("WeightedSpaceSpec::product: dim must be >= 1");
    WeightedSpaceSpec s;
    s.flavor_ = SpaceFlavor::product;
    s.p_ = std::numeric_limits<double>::infinity();
    s.dim_ = dim;
    s.weights_ = Sequence::from_power_law(PowerLaw{1.0, 0.0}, dim);
    return s;
}

double weighted_norm(std::span<const double> x, const WeightedSpaceSpec& space) {
    check_dim(x, space, "weighted_norm");
    switch (space.flavor()) {
        case SpaceFlavor::lp: {
            const double p = space.p();
            double acc = 0.0;
            for (long i = 0; i < space.dim(); ++i)
                acc += space.weights().at(i + 1) *
                       std::pow(std::abs(x[static_cast<std::size_t>(i)]), p);
            return std::pow(acc, 1.0 / p);
        }
        case SpaceFlavor::linf: {
            double sup = 0.0;
            for (long i = 0; i < space.dim(); ++i)
                sup = std::max(sup,
                               space.weights().at(i + 1) * std::abs(x[static_cast<std::size_t>(i)]));
            return sup;
        }
        case SpaceFlavor::product:
            throw std::invalid_argument(
                "weighted_norm: product flavor carries a metric, not a norm; use product_metric");
    }
    throw std::logic_error("weighted_norm: unreachable");
}

double product_metric(std::span<const double> x, std::span<const double> y,
                      const WeightedSpaceSpec& space) {
    check_dim(x, space, "product_metric");
    check_dim(y, space, "product_metric");
    double acc = 0.0;
    double partial_sq = 0.0;
    double half_pow = 1.0;
    for (long k = 1; k <= space.dim(); ++k) {
        const double diff = x[static_cast<std::size_t>(k - 1)] - y[static_cast<std::size_t>(k - 1)];
        partial_sq += diff * diff;
        const double nk = std::sqrt(partial_sq);
        half_pow *= 0.5;
        acc += half_pow * nk / (nk + 1.0);
    }
    return acc;
}

EigenSequence::EigenSequence(Sequence lambdas) : lambdas_(std::move(lambdas)) {
    double prev = 1.0;
    for (long i = 1; i <= lambdas_.size(); ++i) {
        const double l = lambdas_.at(i);
        if (!(l > 0.0)) throw std::invalid_argument("EigenSequence: eigenvalues must be > 0");
        if (l > prev + 1e-15)
            throw std::invalid_argument("EigenSequence: sequence must be non-increasing with l_1 <= 1");
        prev = l;
    }
}

EigenSequence EigenSequence::power(double s, long n) {
    if (s < 0.0) throw std::invalid_argument("EigenSequence::power: s must be >= 0");
    return EigenSequence(Sequence::from_power_law(PowerLaw{1.0, -s}, n));
}

SumBracket EigenSequence::squared_sum_bracket() const {
    double partial = 0.0;
    for (long i = 1; i <= size(); ++i) {
        const double l = at(i);
        partial += l * l;
    }
    SumBracket out;
    if (lambdas_.law()) {
        const PowerLaw sq{lambdas_.law()->scale * lambdas_.law()->scale,
                          2.0 * lambdas_.law()->exponent};
        const SumBracket tail = power_tail_bracket(sq, size());
        out.finite = tail.finite;
        out.lo = partial + tail.lo;
        out.hi = partial + tail.hi;
    } else {
        out.finite = false;
        out.lo = partial;
        out.hi = std::numeric_limits<double>::infinity();
    }
    return out;
}

double level_norm(const SpectralVector& f) {
    double acc = 0.0;
    for (double a : f.coeffs) acc += a * a;
    return std::sqrt(acc);
}

std::vector<double> tau_map(const SpectralVector& f, const EigenSequence& eig) {
    if (static_cast<long>(f.coeffs.size()) != eig.size())
        throw std::invalid_argument("tau_map: coefficient/eigenvalue length mismatch");
    std::vector<double> x(f.coeffs.size());
    for (long i = 1; i <= eig.size(); ++i) {
        const double lm = std::pow(eig.at(i), static_cast<double>(f.level));
        x[static_cast<std::size_t>(i - 1)] = lm * f.coeffs[static_cast<std::size_t>(i - 1)];
    }
    return x;
}

SpectralVector tau_inverse(std::span<const double> x, const EigenSequence& eig, int level) {
    if (static_cast<long>(x.size()) != eig.size())
        throw std::invalid_argument("tau_inverse: length mismatch");
    SpectralVector f;
    f.level = level;
    f.coeffs.resize(x.size());
    for (long i = 1; i <= eig.size(); ++i) {
        const double lm = std::pow(eig.at(i), -static_cast<double>(level));
        f.coeffs[static_cast<std::size_t>(i - 1)] = lm * x[static_cast<std::size_t>(i - 1)];
    }
    return f;
}

WeightedSpaceSpec tau_space(const EigenSequence& eig, int level) {
    return WeightedSpaceSpec::lp(2.0, eig.lambdas().pow(-2.0 * level));
}

double plateau_bump(double x) {
    const double a = std::abs(x);
    if (a <= 1.0) return 1.0;
    if (a >= 3.0) return 0.0;
    // Quintic smoothstep on the transition band: C^2 at both joins,
    // max slope 15/16 * 1/2 = 15/32 per unit of s => |eta'| = |h'(s)|/2 <= 15/16.
    const double s = 0.5 * (a - 1.0);
    const double fall = s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
    return 1.0 - fall;
}

double plateau_bump_slope_bound() { return 15.0 / 16.0; }

bool nest_contains(std::span<const double> x, long M, const WeightedSpaceSpec& space,
                   double delta) {
    if (space.flavor() != SpaceFlavor::lp)
        throw std::invalid_argument("nest_contains: defined for lp flavor only");
    if (M < 1) throw std::invalid_argument("nest_contains: M must be >= 1");
    if (!(delta > 0.0)) throw std::invalid_argument("nest_contains: delta must be > 0");
    check_dim(x, space, "nest_contains");
    const double p = space.p();
    for (long i = 1; i <= space.dim(); ++i) {
        const double lhs =
            std::pow(space.weights().at(i), 1.0 / p) * std::abs(x[static_cast<std::size_t>(i - 1)]);
        const double rhs = static_cast<double>(M) *
                           std::pow(static_cast<double>(i), -(1.0 + delta) / p);
        if (lhs > rhs) return false;
    }
    return true;
}

CylinderFunction localize(const CylinderFunction& f, long M, const WeightedSpaceSpec& space,
                          double delta) {
    if (space.flavor() != SpaceFlavor::lp)
        throw std::invalid_argument("localize: defined for lp flavor only");
    if (M < 1) throw std::invalid_argument("localize: M must be >= 1");
    if (!(delta > 0.0)) throw std::invalid_argument("localize: delta must be > 0");

    const long n = space.dim();
    const double p = space.p();
    auto scales = std::make_shared<std::vector<double>>();
    scales->reserve(static_cast<std::size_t>(n));
    for (long i = 1; i <= n; ++i) {
        scales->push_back(std::pow(static_cast<double>(i), (1.0 + delta) / p) *
                          std::pow(space.weights().at(i), 1.0 / p) / static_cast<double>(M));
    }

    std::vector<int> active(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) active[static_cast<std::size_t>(i)] = static_cast<int>(i);

    // Map positions of f's active coordinates inside the full argument list.
    auto inner = std::make_shared<CylinderFunction>(f);
    auto eval = [inner, scales](std::span<const double> args) {
        double cut = 1.0;
        for (std::size_t i = 0; i < args.size(); ++i) {
            cut *= plateau_bump((*scales)[i] * args[i]);
            if (cut == 0.0) return 0.0;
        }
        return cut * (*inner)(args);
    };

    double scale_norm_sq = 0.0;
    for (double s : *scales) scale_norm_sq += s * s;
    const double lip =
        f.lipschitz() + f.sup_bound() * plateau_bump_slope_bound() * std::sqrt(scale_norm_sq);
    return CylinderFunction(std::move(active), eval, lip, 0.0, f.sup_bound());
}

std::vector<double> cesaro_mean(const std::vector<std::vector<double>>& seq, long m) {
    if (seq.empty()) throw std::invalid_argument("cesaro_mean: empty sequence");
    if (m < 1 || m > static_cast<long>(seq.size()))
        throw std::invalid_argument("cesaro_mean: m must be in [1, len]");
    std::vector<double> out(seq.front().size(), 0.0);
    for (long l = 0; l < m; ++l) {
        if (seq[static_cast<std::size_t>(l)].size() != out.size())
            throw std::invalid_argument("cesaro_mean: ragged sequence");
        for (std::size_t k = 0; k < out.size(); ++k)
            out[k] += seq[static_cast<std::size_t>(l)][k];
    }
    for (double& v : out) v /= static_cast<double>(m);
    return out;
}

CylinderFunction cesaro_mean(const std::vector<CylinderFunction>& seq, long m) {
    if (seq.empty()) throw std::invalid_argument("cesaro_mean: empty sequence");
    if (m < 1 || m > static_cast<long>(seq.size()))
        throw std::invalid_argument("cesaro_mean: m must be in [1, len]");

    // Union of active coordinates, each term re-evaluated on its own slice.
    std::vector<int> active;
    for (long l = 0; l < m; ++l)
        for (int i : seq[static_cast<std::size_t>(l)].active())
            if (std::find(active.begin(), active.end(), i) == active.end()) active.push_back(i);
    std::sort(active.begin(), active.end());

    auto terms = std::make_shared<std::vector<CylinderFunction>>(seq.begin(), seq.begin() + m);
    auto coords = std::make_shared<std::vector<int>>(active);
    auto eval = [terms, coords](std::span<const double> args) {
        // Scatter the gathered arguments into a dense point covering the union.
        const int max_index = coords->empty() ? 0 : coords->back() + 1;
        std::vector<double> point(static_cast<std::size_t>(max_index), 0.0);
        for (std::size_t k = 0; k < coords->size(); ++k)
            point[static_cast<std::size_t>((*coords)[k])] = args[k];
        double acc = 0.0;
        for (const auto& g : *terms) acc += g(point);
        return acc / static_cast<double>(terms->size());
    };

    double lip = 0.0;
    double sup = 0.0;
    for (const auto& g : *terms) {
        lip += g.lipschitz();
        sup = std::max(sup, g.sup_bound());
    }
    lip /= static_cast<double>(m);
    return CylinderFunction(std::move(active), eval, lip, 0.0, sup);
}

}  // namespace nlforms
