#include "nlforms/qr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace nlforms {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

std::string to_string(SumProfile p) {
    return p == SumProfile::gamma_squared ? "gamma_squared" : "gamma_linear";
}

// --- TailSource ---------------------------------------------------------------

TailSource TailSource::zero() {
    TailSource t;
    t.kind_ = Kind::zero;
    return t;
}

TailSource TailSource::unit() {
    TailSource t;
    t.kind_ = Kind::unit;
    return t;
}

TailSource TailSource::synthetic_power(double k) {
    if (k < 0.0) throw std::invalid_argument("TailSource::synthetic_power: k must be >= 0");
    TailSource t;
    t.kind_ = Kind::synthetic;
    t.k_ = k;
    return t;
}

TailSource TailSource::closed_form(std::shared_ptr<const MeasureBackend> measure) {
    if (!measure) throw std::invalid_argument("TailSource::closed_form: null measure");
    TailSource t;
    t.kind_ = Kind::closed_form;
    t.measure_ = std::move(measure);
    return t;
}

TailSource TailSource::empirical(std::shared_ptr<const MeasureBackend> measure, long samples,
                                 std::uint64_t seed) {
    if (!measure) throw std::invalid_argument("TailSource::empirical: null measure");
    if (samples < 1) throw std::invalid_argument("TailSource::empirical: samples must be >= 1");
    TailSource t;
    t.kind_ = Kind::empirical;
    t.measure_ = std::move(measure);
    t.samples_ = samples;
    t.seed_ = seed;
    return t;
}

void TailSource::ensure_table() const {
    if (table_) return;
    auto table = std::make_shared<std::vector<std::vector<double>>>();
    auto sampler = measure_->make_sampler(seed_);
    table->reserve(static_cast<std::size_t>(samples_));
    for (long s = 0; s < samples_; ++s) table->push_back(sampler->next());
    table_ = std::move(table);
}

double TailSource::prob(long i, double threshold) const {
    if (threshold < 0.0) throw std::invalid_argument("TailSource::prob: negative threshold");
    switch (kind_) {
        case Kind::zero: return 0.0;
        case Kind::unit: return 1.0;
        case Kind::synthetic:
            return std::min(1.0, std::pow(std::max(threshold, 1e-300), -k_));
        case Kind::closed_form:
            return measure_->tail_prob(i - 1, threshold).value;  // sequences are 1-based
        case Kind::empirical: {
            ensure_table();
            long hits = 0;
            for (const auto& x : *table_)
                if (std::abs(x[static_cast<std::size_t>(i - 1)]) > threshold) ++hits;
            return static_cast<double>(hits) / static_cast<double>(table_->size());
        }
    }
    return 1.0;
}

std::optional<PowerLaw> TailSource::tail_law(const std::optional<PowerLaw>& threshold_law,
                                             long beyond) const {
    switch (kind_) {
        case Kind::zero: return PowerLaw{0.0, 0.0};
        case Kind::unit: return PowerLaw{1.0, 0.0};
        case Kind::synthetic: {
            if (!threshold_law) return std::nullopt;
            // min(1, t^-k) with t_i = c i^e: exactly a power law past the
            // truncation when the min() branch is settled for all i > beyond.
            const double c = threshold_law->scale;
            const double e = threshold_law->exponent;
            if (k_ == 0.0) return PowerLaw{1.0, 0.0};
            if (c <= 0.0) return PowerLaw{1.0, 0.0};  // zero thresholds: tail = 1
            const double t_next = c * std::pow(static_cast<double>(beyond + 1), e);
            if (e >= 0.0 && t_next >= 1.0) return PowerLaw{std::pow(c, -k_), -e * k_};
            if (e <= 0.0 && t_next <= 1.0) return PowerLaw{1.0, 0.0};
            return std::nullopt;
        }
        case Kind::closed_form:
        case Kind::empirical:
            return std::nullopt;
    }
    return std::nullopt;
}

// --- DensityBoundProvider ------------------------------------------------------

DensityBoundProvider DensityBoundProvider::none() { return DensityBoundProvider{}; }

DensityBoundProvider DensityBoundProvider::constant(double l) {
    if (l < 0.0) throw std::invalid_argument("DensityBoundProvider: bound must be >= 0");
    DensityBoundProvider p;
    p.kind_ = Kind::constant;
    p.constant_ = l;
    return p;
}

DensityBoundProvider DensityBoundProvider::table(std::vector<long> m_grid,
                                                 std::vector<std::vector<double>> l_rows) {
    if (m_grid.size() != l_rows.size() || m_grid.empty())
        throw std::invalid_argument("DensityBoundProvider: grid/rows mismatch");
    DensityBoundProvider p;
    p.kind_ = Kind::table;
    p.m_grid_ = std::move(m_grid);
    p.rows_ = std::move(l_rows);
    return p;
}

DensityBoundProvider DensityBoundProvider::function(std::function<double(long, long)> f) {
    if (!f) throw std::invalid_argument("DensityBoundProvider: null function");
    DensityBoundProvider p;
    p.kind_ = Kind::function;
    p.fn_ = std::move(f);
    return p;
}

double DensityBoundProvider::at(long m, long i) const {
    switch (kind_) {
        case Kind::none:
            throw std::invalid_argument("DensityBoundProvider: no bounds supplied");
        case Kind::constant:
            return constant_;
        case Kind::table: {
            // Nearest grid row at or below m; conservative for growing tables.
            std::size_t row = 0;
            for (std::size_t k = 0; k < m_grid_.size(); ++k)
                if (m_grid_[k] <= m) row = k;
            const auto& r = rows_[row];
            if (static_cast<std::size_t>(i - 1) >= r.size())
                throw std::out_of_range("DensityBoundProvider: index beyond table");
            return r[static_cast<std::size_t>(i - 1)];
        }
        case Kind::function:
            return fn_(m, i);
    }
    return 0.0;
}

std::optional<PowerLaw> DensityBoundProvider::law_in_i(long) const {
    if (kind_ == Kind::constant) return PowerLaw{constant_, 0.0};
    return std::nullopt;
}

// --- condition evaluation -------------------------------------------------------

namespace {

struct FitResult {
    double slope = 0.0;
    double max_residual = std::numeric_limits<double>::infinity();
    bool usable = false;
};

/// Least-squares slope of log(values) against log(i) over a geometric
/// subsample of the upper index range.
FitResult fit_observed_envelope(const std::vector<double>& summands) {
    FitResult out;
    const long n = static_cast<long>(summands.size());
    if (n < 16) return out;
    std::vector<double> xs, ys;
    for (double f = static_cast<double>(n) / 8.0; f <= static_cast<double>(n);
         f *= 1.25) {
        const long i = std::min<long>(n, std::max<long>(2, static_cast<long>(f)));
        const double v = summands[static_cast<std::size_t>(i - 1)];
        if (!(v > 0.0)) return out;  // zeros: no power envelope
        xs.push_back(std::log(static_cast<double>(i)));
        ys.push_back(std::log(v));
    }
    if (xs.size() < 4) return out;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k) {
        sx += xs[k];
        sy += ys[k];
        sxx += xs[k] * xs[k];
        sxy += xs[k] * ys[k];
    }
    const double denom = m * sxx - sx * sx;
    if (std::abs(denom) < 1e-12) return out;
    out.slope = (m * sxy - sx * sy) / denom;
    const double intercept = (sy - out.slope * sx) / m;
    out.max_residual = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k)
        out.max_residual =
            std::max(out.max_residual, std::abs(ys[k] - (intercept + out.slope * xs[k])));
    out.usable = out.max_residual < 0.05;
    return out;
}

/// Core evaluator: series sum_i coeff_i * tails(i, thresholds_i).
ConditionReport evaluate_sum_condition(std::string id, const Sequence& coeff,
                                       const Sequence& thresholds, const TailSource& tails) {
    ConditionReport rep;
    rep.id = std::move(id);
    const long n = coeff.size();

    std::vector<double> summands(static_cast<std::size_t>(n));
    for (long i = 1; i <= n; ++i) {
        const double tau = tails.prob(i, thresholds.at(i));
        const double s = coeff.at(i) * tau;
        summands[static_cast<std::size_t>(i - 1)] = s;
        rep.partial_sum += s;
        rep.coeff_partial += coeff.at(i);
    }

    if (coeff.law()) {
        const SumBracket tail = power_tail_bracket(*coeff.law(), n);
        SumBracket cb;
        cb.finite = tail.finite;
        cb.lo = rep.coeff_partial + tail.lo;
        cb.hi = rep.coeff_partial + tail.hi;
        rep.coeff_bracket = cb;
    }

    // Route 1: coefficient series converges on its own; tails <= 1 seals it.
    if (coeff.law() && coeff.law()->exponent < -1.0) {
        rep.verdict = Verdict::pass;
        SumBracket sb;
        sb.lo = rep.partial_sum;
        sb.hi = rep.partial_sum + power_tail_bracket(*coeff.law(), n).hi;
        rep.summand_bracket = sb;
        rep.note = "coefficient series convergent by integral test; tails bounded by 1";
        return rep;
    }
    if (coeff.law() && coeff.law()->scale == 0.0) {
        rep.verdict = Verdict::pass;
        rep.summand_bracket = SumBracket{rep.partial_sum, rep.partial_sum, true};
        rep.note = "coefficient series identically zero";
        return rep;
    }

    // Route 2: exact combined law coeff_i * tail_i beyond the truncation.
    const auto tail_law = tails.tail_law(thresholds.law(), n);
    if (coeff.law() && tail_law) {
        const PowerLaw combined{coeff.law()->scale * tail_law->scale,
                                coeff.law()->exponent + tail_law->exponent};
        if (combined.scale == 0.0 || combined.exponent < -1.0) {
            const SumBracket tail = power_tail_bracket(combined, n);
            rep.verdict = Verdict::pass;
            rep.summand_bracket = SumBracket{rep.partial_sum + tail.lo, rep.partial_sum + tail.hi,
                                             true};
            rep.note = "summand series convergent by integral test on the exact envelope";
        } else {
            rep.verdict = Verdict::fail;
            rep.summand_bracket =
                SumBracket{rep.partial_sum, std::numeric_limits<double>::infinity(), false};
            rep.note = "summand envelope " + std::to_string(combined.scale) + " * i^" +
                       std::to_string(combined.exponent) + " diverges by integral test";
        }
        return rep;
    }

    // Route 3: all computed tails are zero and the source is the zero tail.
    if (tails.is_zero()) {
        rep.verdict = Verdict::pass;
        rep.summand_bracket = SumBracket{0.0, 0.0, true};
        rep.note = "tail probabilities identically zero";
        return rep;
    }

    // Route 4: no rigorous envelope; report the observed one.
    const FitResult fit = fit_observed_envelope(summands);
    if (fit.usable) {
        rep.fitted_exponent = fit.slope;
        if (fit.slope >= -1.0 - 1e-9) {
            rep.verdict = Verdict::fail;
            rep.note = "observed summand envelope i^" + std::to_string(fit.slope) +
                       " fails the integral test";
        } else {
            rep.verdict = Verdict::inconclusive;
            rep.note = "observed envelope suggests convergence (slope " +
                       std::to_string(fit.slope) + ") but no rigorous tail bound is available";
        }
    } else {
        rep.verdict = Verdict::inconclusive;
        rep.note = "no recognizable envelope beyond the truncation";
    }
    return rep;
}

/// Empirical support-localization evidence: max over draws and coordinates
/// of scale_i |X_i|; finite evidence for the almost-sure localization event.
ConditionReport support_condition(std::string id, const Sequence& scale, const TailSource& tails) {
    ConditionReport rep;
    rep.id = std::move(id);
    if (!tails.has_sample_source()) {
        rep.verdict = Verdict::inconclusive;
        rep.note = "no sample source supplied; localization not probed";
        return rep;
    }
    const long n = scale.size();
    const long want = std::max<long>(1, std::min<long>(tails.sample_count(), 4096));
    auto sampler = tails.measure()->make_sampler(Rng::derive(tails.seed(), 0xA11));
    double worst = 0.0;
    for (long s = 0; s < want; ++s) {
        const auto& x = sampler->next();
        for (long i = 1; i <= n; ++i)
            worst = std::max(worst, scale.at(i) * std::abs(x[static_cast<std::size_t>(i - 1)]));
    }
    rep.empirical_max = worst;
    rep.verdict = std::isfinite(worst) ? Verdict::pass : Verdict::fail;
    rep.note = "empirical evidence only: max scaled coordinate over " + std::to_string(want) +
               " draws";
    return rep;
}

Verdict combine(Verdict main, Verdict hypothesis) {
    if (main == Verdict::fail || hypothesis == Verdict::fail) return Verdict::fail;
    if (main == Verdict::inconclusive) return Verdict::inconclusive;
    return Verdict::pass;
}

void require_gamma(const QRInput& input) {
    if (input.gamma.size() != input.space.dim())
        throw std::invalid_argument("qr check: gamma length must match the space dimension");
    for (long i = 1; i <= input.gamma.size(); ++i)
        if (!(input.gamma.at(i) > 0.0))
            throw std::invalid_argument("qr check: gamma must be strictly positive");
}

}  // namespace

// --- public checks ---------------------------------------------------------------

QRReport check_lp_case(const QRInput& input) {
    if (input.space.flavor() != SpaceFlavor::lp)
        throw std::invalid_argument("check_lp_case: space flavor must be lp");
    if (!(input.alpha > 0.0 && input.alpha <= 1.0))
        throw std::invalid_argument("check_lp_case: requires 0 < alpha <= 1");
    require_gamma(input);

    const double p = input.space.p();
    const Sequence& beta = input.space.weights();
    const Sequence& gamma = input.gamma;

    QRReport rep;
    rep.alpha = input.alpha;
    rep.flavor = SpaceFlavor::lp;
    rep.p = p;
    rep.n = input.space.dim();
    rep.seed = input.seed;

    // gamma_squared: beta^(2/p) gamma^2 against |X_i| > M0 beta^(-1/p) gamma^-1.
    rep.conditions.push_back(evaluate_sum_condition(
        "weight_sum[gamma_squared]", beta.pow(2.0 / p).times(gamma.pow(2.0)),
        beta.pow(-1.0 / p).times(gamma.pow(-1.0)).scaled(input.m0), input.tails));

    // gamma_linear: beta gamma against |X_i| > M0 beta^(-1/p) gamma^(-1/p).
    rep.conditions.push_back(evaluate_sum_condition(
        "weight_sum[gamma_linear]", beta.times(gamma),
        beta.pow(-1.0 / p).times(gamma.pow(-1.0 / p)).scaled(input.m0), input.tails));

    // Hypothesis: gamma^-1 must lie in l^p.
    rep.conditions.push_back(evaluate_sum_condition("gamma_inverse_summability", gamma.pow(-p),
                                                    gamma.pow(0.0).scaled(0.0),
                                                    TailSource::unit()));

    // Localization evidence under both threshold readings.
    rep.conditions.push_back(support_condition("support_localization[gamma_inv_p]",
                                               beta.pow(1.0 / p).times(gamma.pow(1.0 / p)),
                                               input.tails));
    rep.conditions.push_back(support_condition("support_localization[gamma_inv]",
                                               beta.pow(1.0 / p).times(gamma.pow(1.0)),
                                               input.tails));

    rep.verdict_profile = SumProfile::gamma_linear;
    rep.verdict = combine(rep.conditions[1].verdict, rep.conditions[2].verdict);
    return rep;
}

QRReport check_linf_case(const QRInput& input) {
    if (input.space.flavor() != SpaceFlavor::linf)
        throw std::invalid_argument("check_linf_case: space flavor must be linf");
    if (!(input.alpha > 0.0 && input.alpha <= 1.0))
        throw std::invalid_argument("check_linf_case: requires 0 < alpha <= 1");
    require_gamma(input);

    const Sequence& gamma = input.gamma;
    for (long i = 2; i <= gamma.size(); ++i)
        if (gamma.at(i) < gamma.at(i - 1) - 1e-15)
            throw std::invalid_argument("check_linf_case: gamma must be non-decreasing");
    const bool unbounded_by_law = gamma.law() && gamma.law()->exponent > 0.0;
    const bool strictly_growing = gamma.at(gamma.size()) > gamma.at(1) * (1.0 + 1e-12);
    if (!unbounded_by_law && !strictly_growing)
        throw std::invalid_argument("check_linf_case: gamma must grow to infinity");

    const Sequence& beta = input.space.weights();

    QRReport rep;
    rep.alpha = input.alpha;
    rep.flavor = SpaceFlavor::linf;
    rep.p = input.space.p();
    rep.n = input.space.dim();
    rep.seed = input.seed;

    const Sequence threshold = beta.pow(-1.0).times(gamma.pow(-1.0)).scaled(input.m0);
    rep.conditions.push_back(evaluate_sum_condition(
        "weight_sum[gamma_squared]", beta.pow(2.0).times(gamma.pow(2.0)), threshold, input.tails));
    rep.conditions.push_back(
        evaluate_sum_condition("weight_sum[gamma_linear]", beta.times(gamma), threshold,
                               input.tails));
    rep.conditions.push_back(support_condition("support_localization", beta.times(gamma),
                                               input.tails));

    rep.verdict_profile = SumProfile::gamma_linear;
    rep.verdict = rep.conditions[1].verdict;
    return rep;
}

QRReport check_alpha_gt1(const QRInput& input) {
    if (!(input.alpha > 1.0 && input.alpha < 2.0))
        throw std::invalid_argument("check_alpha_gt1: requires 1 < alpha < 2");
    if (!input.density_bounds.available())
        throw std::invalid_argument("check_alpha_gt1: density-bound table is required");
    require_gamma(input);

    const double p = input.space.p();
    const Sequence& beta = input.space.weights();
    const Sequence& gamma = input.gamma;
    const double alpha = input.alpha;

    // Per-flavor weight w_i and threshold scale s_i: events are
    // |X_i| > M * s_i and summands L_{M,i} w_i^alpha.
    Sequence w = gamma.pow(-1.0);       // product-space default
    Sequence scale = gamma;             // product-space default
    if (input.space.flavor() == SpaceFlavor::lp) {
        w = beta.pow(1.0 / p).times(gamma.pow(1.0 / p));
        scale = w.pow(-1.0);
    } else if (input.space.flavor() == SpaceFlavor::linf) {
        w = beta.times(gamma);
        scale = w.pow(-1.0);
    }

    QRReport rep;
    rep.alpha = alpha;
    rep.flavor = input.space.flavor();
    rep.p = p;
    rep.n = input.space.dim();
    rep.seed = input.seed;

    if (input.space.flavor() != SpaceFlavor::product) {
        rep.conditions.push_back(evaluate_sum_condition("order_sum",
                                                        w.pow(alpha + 1.0),
                                                        scale.scaled(input.m0), input.tails));
    }

    // Dyadic probe of lim_M M^-alpha sum_i L_{M,i} w_i^alpha mu(|X_i| > M s_i).
    Verdict limit_verdict = Verdict::pass;
    std::string limit_note;
    double surrogate = 0.0;
    long argmax_m = 0;
    for (long m = 1; m <= input.dyadic_cap; m *= 2) {
        Sequence coeff = w.pow(alpha);
        if (const auto l_law = input.density_bounds.law_in_i(m); l_law) {
            coeff = coeff.times(Sequence::from_power_law(*l_law, coeff.size()));
        } else {
            std::vector<double> vals(static_cast<std::size_t>(coeff.size()));
            for (long i = 1; i <= coeff.size(); ++i)
                vals[static_cast<std::size_t>(i - 1)] = input.density_bounds.at(m, i);
            coeff = coeff.times(Sequence::from_values(std::move(vals)));
        }
        ConditionReport fixed = evaluate_sum_condition(
            "density_limit[M=" + std::to_string(m) + "]", coeff,
            scale.scaled(static_cast<double>(m)), input.tails);
        const double total = fixed.summand_bracket ? fixed.summand_bracket->hi
                                                   : fixed.partial_sum;
        const double g = std::pow(static_cast<double>(m), -alpha) * total;
        rep.probe_m.push_back(m);
        rep.probe_value.push_back(g);
        if (fixed.verdict == Verdict::fail) {
            limit_verdict = Verdict::fail;
            limit_note = "inner sum diverges at M = " + std::to_string(m);
            rep.conditions.push_back(std::move(fixed));
            break;
        }
        if (fixed.verdict == Verdict::inconclusive && limit_verdict == Verdict::pass) {
            limit_verdict = Verdict::inconclusive;
            limit_note = "inner sum has no rigorous bound at M = " + std::to_string(m);
        }
        if (g >= surrogate) {
            surrogate = g;
            argmax_m = m;
        }
    }
    rep.limsup_surrogate = surrogate;

    ConditionReport limit;
    limit.id = "density_limit";
    limit.partial_sum = surrogate;
    if (limit_verdict == Verdict::pass) {
        const bool grew_to_cap = argmax_m >= input.dyadic_cap && surrogate > 0.0 &&
                                 rep.probe_value.size() >= 2 &&
                                 rep.probe_value.back() >
                                     rep.probe_value[rep.probe_value.size() - 2];
        if (grew_to_cap) {
            limit.verdict = Verdict::inconclusive;
            limit.note = "scaled sums still growing at the dyadic cap";
        } else {
            limit.verdict = Verdict::pass;
            limit.note = "scaled sums bounded on the dyadic grid, max at M = " +
                         std::to_string(argmax_m);
        }
    } else {
        limit.verdict = limit_verdict;
        limit.note = limit_note;
    }
    rep.conditions.push_back(limit);

    if (input.space.flavor() != SpaceFlavor::product) {
        rep.verdict = combine(rep.conditions[0].verdict, rep.conditions.back().verdict);
    } else {
        rep.verdict = rep.conditions.back().verdict;
    }
    return rep;
}

QRInput preset(const std::string& name, const EigenSequence& eig) {
    QRInput input;
    if (name == "example0") {
        input.space = WeightedSpaceSpec::lp(2.0, eig.lambdas().pow(4.0));
        input.gamma = eig.lambdas().pow(-2.0);
    } else if (name == "example1") {
        input.space = WeightedSpaceSpec::lp(2.0, eig.lambdas().pow(6.0));
        input.gamma = eig.lambdas().pow(-2.0);
    } else {
        throw std::invalid_argument("preset: unknown name '" + name + "'");
    }
    input.m0 = 1.0;
    input.alpha = 1.0;
    input.tails = TailSource::unit();
    return input;
}

const ConditionReport* QRReport::find(const std::string& id) const {
    for (const auto& c : conditions)
        if (c.id == id) return &c;
    return nullptr;
}

std::string QRReport::format_table() const {
    std::ostringstream os;
    os << "condition                          verdict        partial-sum      bracket\n";
    os << "---------------------------------- ------------- ---------------- ----------------------------\n";
    for (const auto& c : conditions) {
        os.setf(std::ios::left);
        os.width(35);
        os << c.id;
        os.width(14);
        os << to_string(c.verdict);
        os.unsetf(std::ios::left);
        os.precision(10);
        os.width(16);
        os << c.partial_sum;
        os << "  ";
        if (c.summand_bracket) {
            if (c.summand_bracket->finite)
                os << "[" << c.summand_bracket->lo << ", " << c.summand_bracket->hi << "]";
            else
                os << "[" << c.summand_bracket->lo << ", inf)";
        } else if (c.empirical_max) {
            os << "max scaled coord = " << *c.empirical_max;
        }
        os << "\n";
        if (!c.note.empty()) os << "    note: " << c.note << "\n";
    }
    os << "verdict (" << to_string(verdict_profile) << " profile): " << to_string(verdict) << "\n";
    return os.str();
}

}  // namespace nlforms
