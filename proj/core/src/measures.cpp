#include "nlforms/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "nlforms/quadrature.hpp"

namespace nlforms {

namespace {

constexpr double kAtomWeightTol = 1e-12;
constexpr double kSupportCut = 1e-14;

double gaussian_pdf(double y, double mean, double var) {
    const double z = (y - mean);
    return std::exp(-0.5 * z * z / var) / std::sqrt(2.0 * M_PI * var);
}

double gaussian_two_sided_tail(double t, double mean, double var) {
    // P(|Y| > t) for Y ~ N(mean, var), t >= 0.
    const double sd = std::sqrt(var);
    const double upper = 0.5 * std::erfc((t - mean) / (sd * std::sqrt(2.0)));
    const double lower = 0.5 * std::erfc((t + mean) / (sd * std::sqrt(2.0)));
    return upper + lower;
}

}  // namespace

// --- ConditionalDistribution1D ----------------------------------------------

ConditionalDistribution1D ConditionalDistribution1D::from_atoms(std::vector<double> positions,
                                                                std::vector<double> weights) {
    if (positions.size() != weights.size() || positions.empty())
        throw std::invalid_argument("ConditionalDistribution1D: bad atom list");
    double total = 0.0;
    for (double w : weights) {
        if (!(w > 0.0)) throw std::invalid_argument("ConditionalDistribution1D: atom weights must be > 0");
        total += w;
    }
    if (std::abs(total - 1.0) > kAtomWeightTol)
        throw std::invalid_argument("ConditionalDistribution1D: atom weights must sum to 1");
    ConditionalDistribution1D c;
    c.kind_ = Kind::atoms;
    c.positions_ = std::move(positions);
    c.weights_ = std::move(weights);
    return c;
}

ConditionalDistribution1D ConditionalDistribution1D::gaussian(double mean, double var) {
    if (!(var > 0.0)) throw std::invalid_argument("ConditionalDistribution1D: variance must be > 0");
    ConditionalDistribution1D c;
    c.kind_ = Kind::density;
    c.form_ = GaussianForm{mean, var};
    return c;
}

ConditionalDistribution1D ConditionalDistribution1D::uniform(double a, double b) {
    if (!(a < b)) throw std::invalid_argument("ConditionalDistribution1D: requires a < b");
    ConditionalDistribution1D c;
    c.kind_ = Kind::density;
    c.form_ = UniformForm{a, b};
    return c;
}

ConditionalDistribution1D ConditionalDistribution1D::from_unnormalized(
    std::function<double(double)> unnorm, double center_hint, double scale_hint) {
    if (!unnorm) throw std::invalid_argument("ConditionalDistribution1D: null density");
    if (!(scale_hint > 0.0)) scale_hint = 1.0;

    auto d = std::make_shared<GenericDensity>();
    d->unnorm = std::move(unnorm);

    // Widen the window until the ends are negligible against the running max.
    double half = scale_hint;
    double fmax = 0.0;
    for (int round = 0; round < 80; ++round) {
        const double lo = center_hint - half;
        const double hi = center_hint + half;
        fmax = grid_maximum(d->unnorm, lo, hi, 1025, 8).value;
        if (!(fmax > 0.0)) {
            half *= 2.0;
            continue;
        }
        if (d->unnorm(lo) < kSupportCut * fmax && d->unnorm(hi) < kSupportCut * fmax) break;
        half *= 2.0;
    }
    if (!(fmax > 0.0))
        throw std::invalid_argument("ConditionalDistribution1D: density is identically zero");
    d->lo = center_hint - half;
    d->hi = center_hint + half;

    // Normalization + cumulative table on an even grid, Simpson per cell.
    const int cells = 4096;
    d->grid.resize(cells + 1);
    d->cdf.resize(cells + 1);
    const double h = (d->hi - d->lo) / cells;
    double acc = 0.0;
    d->grid[0] = d->lo;
    d->cdf[0] = 0.0;
    double f_left = d->unnorm(d->lo);
    for (int k = 0; k < cells; ++k) {
        const double a = d->lo + h * k;
        const double b = a + h;
        const double fm = d->unnorm(0.5 * (a + b));
        const double f_right = d->unnorm(b);
        acc += (h / 6.0) * (f_left + 4.0 * fm + f_right);
        d->grid[static_cast<std::size_t>(k + 1)] = b;
        d->cdf[static_cast<std::size_t>(k + 1)] = acc;
        f_left = f_right;
    }
    if (!(acc > 0.0) || !std::isfinite(acc))
        throw std::invalid_argument("ConditionalDistribution1D: normalization failed");
    d->z = acc;
    for (double& v : d->cdf) v /= acc;

    ConditionalDistribution1D c;
    c.kind_ = Kind::density;
    c.form_ = std::move(d);
    return c;
}

double ConditionalDistribution1D::pdf(double y) const {
    if (kind_ == Kind::atoms)
        throw std::invalid_argument("ConditionalDistribution1D::pdf: atoms have no density");
    if (const auto* g = std::get_if<GaussianForm>(&form_)) return gaussian_pdf(y, g->mean, g->var);
    if (const auto* u = std::get_if<UniformForm>(&form_))
        return (y >= u->a && y <= u->b) ? 1.0 / (u->b - u->a) : 0.0;
    const auto& d = std::get<std::shared_ptr<GenericDensity>>(form_);
    if (y < d->lo || y > d->hi) return 0.0;
    return d->unnorm(y) / d->z;
}

double ConditionalDistribution1D::cdf(double y) const {
    if (kind_ == Kind::atoms) {
        double acc = 0.0;
        for (std::size_t k = 0; k < positions_.size(); ++k)
            if (positions_[k] <= y) acc += weights_[k];
        return acc;
    }
    if (const auto* g = std::get_if<GaussianForm>(&form_))
        return 0.5 * std::erfc(-(y - g->mean) / std::sqrt(2.0 * g->var));
    if (const auto* u = std::get_if<UniformForm>(&form_)) {
        if (y <= u->a) return 0.0;
        if (y >= u->b) return 1.0;
        return (y - u->a) / (u->b - u->a);
    }
    const auto& d = std::get<std::shared_ptr<GenericDensity>>(form_);
    if (y <= d->lo) return 0.0;
    if (y >= d->hi) return 1.0;
    const auto it = std::upper_bound(d->grid.begin(), d->grid.end(), y);
    const std::size_t k = static_cast<std::size_t>(it - d->grid.begin()) - 1;
    const double x0 = d->grid[k];
    const double x1 = d->grid[k + 1];
    const double w = (y - x0) / (x1 - x0);
    return d->cdf[k] + w * (d->cdf[k + 1] - d->cdf[k]);
}

double ConditionalDistribution1D::sample(Rng& rng) const {
    if (kind_ == Kind::atoms) {
        const int k = rng.categorical(weights_);
        return positions_[static_cast<std::size_t>(k)];
    }
    if (const auto* g = std::get_if<GaussianForm>(&form_))
        return rng.normal(g->mean, std::sqrt(g->var));
    if (const auto* u = std::get_if<UniformForm>(&form_)) return rng.uniform(u->a, u->b);
    const auto& d = std::get<std::shared_ptr<GenericDensity>>(form_);
    const double u = rng.uniform();
    const auto it = std::upper_bound(d->cdf.begin(), d->cdf.end(), u);
    std::size_t k = it == d->cdf.begin() ? 0 : static_cast<std::size_t>(it - d->cdf.begin()) - 1;
    if (k + 1 >= d->cdf.size()) k = d->cdf.size() - 2;
    const double c0 = d->cdf[k];
    const double c1 = d->cdf[k + 1];
    const double w = c1 > c0 ? (u - c0) / (c1 - c0) : 0.5;
    double y = d->grid[k] + w * (d->grid[k + 1] - d->grid[k]);
    // Two Newton polish steps against the interpolated CDF.
    for (int step = 0; step < 2; ++step) {
        const double p = pdf(y);
        if (!(p > 0.0)) break;
        y -= (cdf(y) - u) / p;
        y = std::clamp(y, d->grid[k], d->grid[k + 1]);
    }
    return y;
}

double ConditionalDistribution1D::mean() const {
    if (kind_ == Kind::atoms) {
        double acc = 0.0;
        for (std::size_t k = 0; k < positions_.size(); ++k) acc += positions_[k] * weights_[k];
        return acc;
    }
    if (const auto* g = std::get_if<GaussianForm>(&form_)) return g->mean;
    if (const auto* u = std::get_if<UniformForm>(&form_)) return 0.5 * (u->a + u->b);
    const auto& d = std::get<std::shared_ptr<GenericDensity>>(form_);
    return adaptive_simpson([this](double y) { return y * pdf(y); }, d->lo, d->hi, 1e-12);
}

double ConditionalDistribution1D::variance() const {
    const double m = mean();
    if (kind_ == Kind::atoms) {
        double acc = 0.0;
        for (std::size_t k = 0; k < positions_.size(); ++k) {
            const double z = positions_[k] - m;
            acc += z * z * weights_[k];
        }
        return acc;
    }
    if (const auto* g = std::get_if<GaussianForm>(&form_)) return g->var;
    if (const auto* u = std::get_if<UniformForm>(&form_)) {
        const double w = u->b - u->a;
        return w * w / 12.0;
    }
    const auto& d = std::get<std::shared_ptr<GenericDensity>>(form_);
    return adaptive_simpson([this, m](double y) { return (y - m) * (y - m) * pdf(y); }, d->lo,
                            d->hi, 1e-12);
}

double ConditionalDistribution1D::tail_prob(double t) const {
    if (t < 0.0) throw std::invalid_argument("tail_prob: t must be >= 0");
    if (kind_ == Kind::atoms) {
        double acc = 0.0;
        for (std::size_t k = 0; k < positions_.size(); ++k)
            if (std::abs(positions_[k]) > t) acc += weights_[k];
        return acc;
    }
    if (const auto* g = std::get_if<GaussianForm>(&form_))
        return gaussian_two_sided_tail(t, g->mean, g->var);
    return 1.0 - cdf(t) + cdf(-t);
}

double ConditionalDistribution1D::normalization() const {
    if (kind_ == Kind::atoms) return 1.0;
    if (std::holds_alternative<GaussianForm>(form_) || std::holds_alternative<UniformForm>(form_))
        return 1.0;
    return std::get<std::shared_ptr<GenericDensity>>(form_)->z;
}

double ConditionalDistribution1D::support_lo() const {
    if (kind_ == Kind::atoms) return *std::min_element(positions_.begin(), positions_.end());
    if (const auto* g = std::get_if<GaussianForm>(&form_))
        return g->mean - 40.0 * std::sqrt(g->var);
    if (const auto* u = std::get_if<UniformForm>(&form_)) return u->a;
    return std::get<std::shared_ptr<GenericDensity>>(form_)->lo;
}

double ConditionalDistribution1D::support_hi() const {
    if (kind_ == Kind::atoms) return *std::max_element(positions_.begin(), positions_.end());
    if (const auto* g = std::get_if<GaussianForm>(&form_))
        return g->mean + 40.0 * std::sqrt(g->var);
    if (const auto* u = std::get_if<UniformForm>(&form_)) return u->b;
    return std::get<std::shared_ptr<GenericDensity>>(form_)->hi;
}

const std::vector<double>& ConditionalDistribution1D::atom_positions() const {
    if (kind_ != Kind::atoms)
        throw std::invalid_argument("ConditionalDistribution1D: not an atomic law");
    return positions_;
}

const std::vector<double>& ConditionalDistribution1D::atom_weights() const {
    if (kind_ != Kind::atoms)
        throw std::invalid_argument("ConditionalDistribution1D: not an atomic law");
    return weights_;
}

double density_bound(const ConditionalDistribution1D& cond, double k_lo, double k_hi) {
    if (cond.kind() == ConditionalDistribution1D::Kind::atoms)
        throw std::invalid_argument(
            "density_bound: atomic conditional has no density; the density-bound route "
            "is unavailable");
    if (!(k_lo < k_hi)) throw std::invalid_argument("density_bound: empty interval");
    return grid_maximum([&cond](double y) { return cond.pdf(y); }, k_lo, k_hi).value;
}

double kernel_moment_bound(const ConditionalDistribution1D& cond, double k_lo, double k_hi,
                           double alpha) {
    if (!(alpha > 0.0 && alpha < 2.0))
        throw std::invalid_argument("kernel_moment_bound: alpha must be in (0, 2)");
    if (!(k_lo < k_hi)) throw std::invalid_argument("kernel_moment_bound: empty interval");
    const double power = 1.0 - 2.0 * alpha;

    if (cond.kind() == ConditionalDistribution1D::Kind::atoms) {
        // sup over y in K of the atom sum; the sup over a continuum is attained
        // arbitrarily close to an atom when power < 0, where the sum blows up.
        if (power < 0.0) {
            for (double p : cond.atom_positions())
                if (p >= k_lo && p <= k_hi) return std::numeric_limits<double>::infinity();
        }
        double best = 0.0;
        const int n = 4097;
        for (int k = 0; k < n; ++k) {
            const double y = k_lo + (k_hi - k_lo) * k / (n - 1);
            double acc = 0.0;
            for (std::size_t j = 0; j < cond.atom_positions().size(); ++j) {
                const double p = cond.atom_positions()[j];
                if (p < k_lo || p > k_hi || p == y) continue;
                acc += cond.atom_weights()[j] * std::pow(std::abs(y - p), power);
            }
            best = std::max(best, acc);
        }
        return best;
    }

    // Density route. Near the singular point the integral behaves like
    // 2 rho(y) int_0^h r^power dr, divergent once power <= -1 and rho(y) > 0.
    const double h = 1e-4 * (k_hi - k_lo);
    const int n = 513;
    double best = 0.0;
    for (int k = 0; k < n; ++k) {
        const double y = k_lo + (k_hi - k_lo) * k / (n - 1);
        const double rho_y = cond.pdf(y);
        double singular = 0.0;
        if (rho_y > 1e-300) {
            if (power <= -1.0) return std::numeric_limits<double>::infinity();
            singular = 2.0 * rho_y * std::pow(h, power + 1.0) / (power + 1.0);
        }
        auto integrand = [&](double yp) {
            if (yp < k_lo || yp > k_hi) return 0.0;
            return std::pow(std::abs(y - yp), power) * cond.pdf(yp);
        };
        double acc = singular;
        if (y - h > k_lo) acc += adaptive_simpson(integrand, k_lo, y - h, 1e-8);
        if (y + h < k_hi) acc += adaptive_simpson(integrand, y + h, k_hi, 1e-8);
        best = std::max(best, acc);
    }
    return best;
}

// --- ProductMeasure ----------------------------------------------------------

namespace {

ConditionalDistribution1D marginal_as_conditional(const Marginal1D& m) {
    if (const auto* a = std::get_if<AtomsMarginal>(&m))
        return ConditionalDistribution1D::from_atoms(a->positions, a->weights);
    if (const auto* g = std::get_if<GaussianMarginal>(&m))
        return ConditionalDistribution1D::gaussian(g->mean, g->var);
    const auto& u = std::get<UniformMarginal>(m);
    return ConditionalDistribution1D::uniform(u.a, u.b);
}

class ProductSampler : public Sampler {
  public:
    ProductSampler(const ProductMeasure& m, std::uint64_t seed) : measure_(m), rng_(seed) {
        buffer_.resize(static_cast<std::size_t>(m.dim()));
        conditionals_.reserve(buffer_.size());
        for (long i = 0; i < m.dim(); ++i) conditionals_.push_back(m.conditional(i, buffer_));
    }
    const std::vector<double>& next() override {
        for (std::size_t i = 0; i < buffer_.size(); ++i) buffer_[i] = conditionals_[i].sample(rng_);
        return buffer_;
    }

  private:
    const ProductMeasure& measure_;
    Rng rng_;
    std::vector<double> buffer_;
    std::vector<ConditionalDistribution1D> conditionals_;
};

}  // namespace

ProductMeasure::ProductMeasure(std::vector<Marginal1D> marginals)
    : marginals_(std::move(marginals)) {
    if (marginals_.empty()) throw std::invalid_argument("ProductMeasure: no marginals");
    for (const auto& m : marginals_) marginal_as_conditional(m);  // validates parameters
}

std::string ProductMeasure::describe() const {
    return "product measure, dim " + std::to_string(dim());
}

ConditionalDistribution1D ProductMeasure::conditional(long i, std::span<const double>) const {
    if (i < 0 || i >= dim()) throw std::out_of_range("ProductMeasure::conditional: index");
    return marginal_as_conditional(marginals_[static_cast<std::size_t>(i)]);
}

bool ProductMeasure::finite_support() const {
    for (const auto& m : marginals_)
        if (!std::holds_alternative<AtomsMarginal>(m)) return false;
    return true;
}

std::unique_ptr<Sampler> ProductMeasure::make_sampler(std::uint64_t seed) const {
    return std::make_unique<ProductSampler>(*this, seed);
}

TailEstimate ProductMeasure::tail_prob(long i, double t, const McParams&) const {
    if (i < 0 || i >= dim()) throw std::out_of_range("ProductMeasure::tail_prob: index");
    if (t < 0.0) throw std::invalid_argument("tail_prob: t must be >= 0");
    return TailEstimate{conditional(i, {}).tail_prob(t), 0.0, true};
}

ComplexEstimate ProductMeasure::characteristic_fn(std::span<const double> phi,
                                                  const McParams& mc) const {
    if (static_cast<long>(phi.size()) != dim())
        throw std::invalid_argument("characteristic_fn: dimension mismatch");

    bool all_gaussian = true;
    for (const auto& m : marginals_)
        if (!std::holds_alternative<GaussianMarginal>(m)) all_gaussian = false;

    if (all_gaussian) {
        double quad = 0.0;
        double lin = 0.0;
        for (std::size_t i = 0; i < phi.size(); ++i) {
            const auto& g = std::get<GaussianMarginal>(marginals_[i]);
            quad += g.var * phi[i] * phi[i];
            lin += g.mean * phi[i];
        }
        const std::complex<double> val = std::exp(std::complex<double>(-0.5 * quad, lin));
        return ComplexEstimate{val, 0.0, true};
    }

    auto sampler = make_sampler(mc.seed);
    std::complex<double> acc{0.0, 0.0};
    double acc_re2 = 0.0, acc_im2 = 0.0;
    const long n = std::max<long>(mc.samples, 2);
    for (long k = 0; k < n; ++k) {
        const auto& x = sampler->next();
        double dot = 0.0;
        for (std::size_t i = 0; i < phi.size(); ++i) dot += x[i] * phi[i];
        const std::complex<double> term{std::cos(dot), std::sin(dot)};
        acc += term;
        acc_re2 += term.real() * term.real();
        acc_im2 += term.imag() * term.imag();
    }
    const std::complex<double> mean = acc / static_cast<double>(n);
    const double var_re = std::max(0.0, acc_re2 / n - mean.real() * mean.real());
    const double var_im = std::max(0.0, acc_im2 / n - mean.imag() * mean.imag());
    const double se = std::sqrt((var_re + var_im) / static_cast<double>(n));
    return ComplexEstimate{mean, se, false};
}

// --- GaussianSpectralMeasure --------------------------------------------------

namespace {

class GaussianSpectralSampler : public Sampler {
  public:
    GaussianSpectralSampler(const Sequence& variances, std::uint64_t seed) : rng_(seed) {
        sd_.reserve(static_cast<std::size_t>(variances.size()));
        for (long i = 1; i <= variances.size(); ++i) sd_.push_back(std::sqrt(variances.at(i)));
        buffer_.resize(sd_.size());
    }
    const std::vector<double>& next() override {
        for (std::size_t i = 0; i < sd_.size(); ++i) buffer_[i] = sd_[i] * rng_.normal();
        return buffer_;
    }

  private:
    Rng rng_;
    std::vector<double> sd_;
    std::vector<double> buffer_;
};

}  // namespace

GaussianSpectralMeasure::GaussianSpectralMeasure(Sequence variances)
    : variances_(std::move(variances)) {
    for (long i = 1; i <= variances_.size(); ++i)
        if (!(variances_.at(i) > 0.0))
            throw std::invalid_argument("GaussianSpectralMeasure: variances must be > 0");
}

GaussianSpectralMeasure GaussianSpectralMeasure::from_eigenvalues(const EigenSequence& eig) {
    return GaussianSpectralMeasure(eig.lambdas().pow(2.0));
}

std::string GaussianSpectralMeasure::describe() const {
    return "centered Gaussian spectral measure, dim " + std::to_string(dim());
}

ConditionalDistribution1D GaussianSpectralMeasure::conditional(long i,
                                                               std::span<const double>) const {
    if (i < 0 || i >= dim()) throw std::out_of_range("GaussianSpectralMeasure::conditional: index");
    return ConditionalDistribution1D::gaussian(0.0, variances_.at(i + 1));
}

std::unique_ptr<Sampler> GaussianSpectralMeasure::make_sampler(std::uint64_t seed) const {
    return std::make_unique<GaussianSpectralSampler>(variances_, seed);
}

TailEstimate GaussianSpectralMeasure::tail_prob(long i, double t, const McParams&) const {
    if (i < 0 || i >= dim()) throw std::out_of_range("GaussianSpectralMeasure::tail_prob: index");
    if (t < 0.0) throw std::invalid_argument("tail_prob: t must be >= 0");
    return TailEstimate{gaussian_two_sided_tail(t, 0.0, variances_.at(i + 1)), 0.0, true};
}

ComplexEstimate GaussianSpectralMeasure::characteristic_fn(std::span<const double> phi,
                                                           const McParams&) const {
    if (static_cast<long>(phi.size()) != dim())
        throw std::invalid_argument("characteristic_fn: dimension mismatch");
    double quad = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i)
        quad += variances_.at(static_cast<long>(i) + 1) * phi[i] * phi[i];
    return ComplexEstimate{std::complex<double>(std::exp(-0.5 * quad), 0.0), 0.0, true};
}

SumBracket GaussianSpectralMeasure::weighted_variance_sum(const WeightedSpaceSpec& space) const {
    if (space.dim() != dim())
        throw std::invalid_argument("weighted_variance_sum: dimension mismatch");
    const Sequence prod = space.weights().times(variances_);
    double partial = 0.0;
    for (double v : prod.values()) partial += v;
    SumBracket out;
    if (prod.law()) {
        const SumBracket tail = power_tail_bracket(*prod.law(), prod.size());
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

// --- LatticePhi4Measure --------------------------------------------------------

LatticePhi4Measure::LatticePhi4Measure(Params params) : params_(params) {
    if (params_.d < 1 || params_.d > 3)
        throw std::invalid_argument("LatticePhi4Measure: d must be 1, 2 or 3");
    if (!(params_.eps > 0.0)) throw std::invalid_argument("LatticePhi4Measure: eps must be > 0");
    if (params_.side < 1) throw std::invalid_argument("LatticePhi4Measure: side must be >= 1");
    if (params_.coupling < 0.0)
        throw std::invalid_argument("LatticePhi4Measure: coupling must be >= 0");

    sites_ = 1;
    for (int k = 0; k < params_.d; ++k) sites_ *= params_.side;

    // Row-major site indexing; one edge per axis per site (wrapping when
    // periodic), so a 2-site periodic axis carries a genuine double bond.
    neighbors_.assign(static_cast<std::size_t>(sites_), {});
    std::vector<int> coord(static_cast<std::size_t>(params_.d), 0);
    const int side = params_.side;
    for (long s = 0; s < sites_; ++s) {
        long rem = s;
        for (int k = params_.d - 1; k >= 0; --k) {
            coord[static_cast<std::size_t>(k)] = static_cast<int>(rem % side);
            rem /= side;
        }
        for (int axis = 0; axis < params_.d; ++axis) {
            const int c = coord[static_cast<std::size_t>(axis)];
            long stride = 1;
            for (int k = params_.d - 1; k > axis; --k) stride *= side;
            if (c + 1 < side) {
                const long t = s + stride;
                edges_.emplace_back(static_cast<int>(s), static_cast<int>(t));
            } else if (params_.boundary == LatticeBoundary::periodic && side > 1) {
                const long t = s - stride * (side - 1);
                edges_.emplace_back(static_cast<int>(s), static_cast<int>(t));
            }
        }
    }
    for (const auto& [a, b] : edges_) {
        neighbors_[static_cast<std::size_t>(a)].push_back(b);
        neighbors_[static_cast<std::size_t>(b)].push_back(a);
    }
}

double LatticePhi4Measure::action(std::span<const double> phi) const {
    if (static_cast<long>(phi.size()) != sites_)
        throw std::invalid_argument("LatticePhi4Measure::action: field length mismatch");
    const double grad_w = std::pow(params_.eps, params_.d - 2);
    const double vol_w = std::pow(params_.eps, params_.d);
    double acc = 0.0;
    for (const auto& [a, b] : edges_) {
        const double diff = phi[static_cast<std::size_t>(a)] - phi[static_cast<std::size_t>(b)];
        acc += 0.5 * grad_w * diff * diff;
    }
    for (double v : phi) {
        acc += 0.5 * params_.a_eps * vol_w * v * v;
        acc += 0.5 * params_.coupling * vol_w * v * v * v * v;
    }
    return acc;
}

double LatticePhi4Measure::site_energy(long i, double value, std::span<const double> phi) const {
    const double grad_w = std::pow(params_.eps, params_.d - 2);
    const double vol_w = std::pow(params_.eps, params_.d);
    double acc = 0.0;
    for (int nb : neighbors_[static_cast<std::size_t>(i)]) {
        const double diff = value - phi[static_cast<std::size_t>(nb)];
        acc += 0.5 * grad_w * diff * diff;
    }
    acc += 0.5 * params_.a_eps * vol_w * value * value;
    acc += 0.5 * params_.coupling * vol_w * value * value * value * value;
    return acc;
}

std::string LatticePhi4Measure::describe() const {
    return "lattice quartic Gibbs measure, d=" + std::to_string(params_.d) +
           ", sites=" + std::to_string(sites_);
}

ConditionalDistribution1D LatticePhi4Measure::conditional(long i,
                                                          std::span<const double> x) const {
    if (i < 0 || i >= sites_) throw std::out_of_range("LatticePhi4Measure::conditional: index");
    if (static_cast<long>(x.size()) != sites_)
        throw std::invalid_argument("LatticePhi4Measure::conditional: field length mismatch");

    const double grad_w = std::pow(params_.eps, params_.d - 2);
    const double vol_w = std::pow(params_.eps, params_.d);
    const auto& nbs = neighbors_[static_cast<std::size_t>(i)];
    const double deg = static_cast<double>(nbs.size());
    std::vector<double> nb_vals;
    nb_vals.reserve(nbs.size());
    double nb_sum = 0.0;
    for (int nb : nbs) {
        nb_vals.push_back(x[static_cast<std::size_t>(nb)]);
        nb_sum += x[static_cast<std::size_t>(nb)];
    }

    const double quad_coef = grad_w * deg + params_.a_eps * vol_w;  // 2x the phi^2 coefficient
    const double quart_coef = params_.coupling * vol_w;
    if (quad_coef <= 0.0 && quart_coef <= 0.0)
        throw std::invalid_argument(
            "LatticePhi4Measure::conditional: single-site law is not normalizable");
    const double center = quad_coef > 0.0 ? grad_w * nb_sum / quad_coef : 0.0;
    const double scale = quad_coef > 0.0 ? std::sqrt(1.0 / quad_coef)
                                         : std::pow(std::max(quart_coef, 1e-12), -0.25);

    // Self-contained energy in the site value; offset by its value at the
    // center so exp() stays in range.
    auto energy = [grad_w, mass = params_.a_eps * vol_w, quart_coef,
                   nb_vals = std::move(nb_vals)](double y) {
        double acc = 0.0;
        for (double v : nb_vals) acc += 0.5 * grad_w * (y - v) * (y - v);
        acc += 0.5 * mass * y * y;
        acc += 0.5 * quart_coef * y * y * y * y;
        return acc;
    };
    const double e0 = energy(center);
    auto unnorm = [energy = std::move(energy), e0](double y) { return std::exp(-(energy(y) - e0)); };
    return ConditionalDistribution1D::from_unnormalized(unnorm, center, 4.0 * scale);
}

std::unique_ptr<Sampler> LatticePhi4Measure::make_sampler(std::uint64_t seed) const {
    return std::make_unique<LatticeFieldSampler>(*this, seed);
}

TailEstimate LatticePhi4Measure::tail_prob(long i, double t, const McParams& mc) const {
    if (i < 0 || i >= sites_) throw std::out_of_range("LatticePhi4Measure::tail_prob: index");
    if (t < 0.0) throw std::invalid_argument("tail_prob: t must be >= 0");
    LatticeFieldSampler sampler(*this, mc.seed);
    long hits = 0;
    const long n = std::max<long>(mc.samples, 2);
    for (long k = 0; k < n; ++k) {
        const auto& phi = sampler.next();
        if (std::abs(phi[static_cast<std::size_t>(i)]) > t) ++hits;
    }
    const double p = static_cast<double>(hits) / static_cast<double>(n);
    const double se = std::sqrt(std::max(p * (1.0 - p), 1.0 / n) / static_cast<double>(n));
    return TailEstimate{p, se, false};
}

ComplexEstimate LatticePhi4Measure::characteristic_fn(std::span<const double>,
                                                      const McParams&) const {
    throw std::invalid_argument(
        "characteristic_fn: defined for product and Gaussian spectral backends only");
}

SweepStats mcmc_step(const LatticePhi4Measure& measure, std::vector<double>& phi,
                     double proposal_sd, Rng& rng) {
    if (static_cast<long>(phi.size()) != measure.sites())
        throw std::invalid_argument("mcmc_step: field length mismatch");
    if (proposal_sd < 0.0) throw std::invalid_argument("mcmc_step: negative proposal stddev");
    SweepStats stats;
    for (long i = 0; i < measure.sites(); ++i) {
        const double old_val = phi[static_cast<std::size_t>(i)];
        const double new_val = old_val + proposal_sd * rng.normal();
        const double delta =
            measure.site_energy(i, new_val, phi) - measure.site_energy(i, old_val, phi);
        ++stats.proposed;
        if (delta <= 0.0 || rng.uniform() < std::exp(-delta)) {
            phi[static_cast<std::size_t>(i)] = new_val;
            ++stats.accepted;
        }
    }
    return stats;
}

LatticeFieldSampler::LatticeFieldSampler(const LatticePhi4Measure& measure, std::uint64_t seed)
    : measure_(measure), rng_(seed) {
    phi_.assign(static_cast<std::size_t>(measure.sites()), 0.0);
    // Burn-in with stddev tuned into the 0.3-0.5 acceptance band, then frozen.
    const long burn = std::max<long>(measure.params().burn_in, 1);
    const long block = 50;
    long done = 0;
    while (done < burn) {
        const long todo = std::min(block, burn - done);
        SweepStats s;
        for (long k = 0; k < todo; ++k) {
            const SweepStats one = mcmc_step(measure_, phi_, sd_, rng_);
            s.proposed += one.proposed;
            s.accepted += one.accepted;
        }
        done += todo;
        const double rate = s.acceptance();
        if (rate > 0.5)
            sd_ *= 1.25;
        else if (rate < 0.3)
            sd_ /= 1.25;
        sd_ = std::clamp(sd_, 1e-3, 1e3);
    }
}

SweepStats LatticeFieldSampler::sweep_block(long sweeps) {
    SweepStats s;
    for (long k = 0; k < sweeps; ++k) {
        const SweepStats one = mcmc_step(measure_, phi_, sd_, rng_);
        s.proposed += one.proposed;
        s.accepted += one.accepted;
    }
    stats_.proposed += s.proposed;
    stats_.accepted += s.accepted;
    return s;
}

const std::vector<double>& LatticeFieldSampler::next() {
    sweep_block(std::max<long>(measure_.params().thin, 1));
    return phi_;
}

std::vector<double> sample(const MeasureBackend& measure, std::uint64_t seed) {
    return measure.make_sampler(seed)->next();
}

}  // namespace nlforms
