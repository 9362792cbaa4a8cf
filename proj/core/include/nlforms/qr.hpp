#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nlforms/measures.hpp"
#include "nlforms/sequences.hpp"
#include "nlforms/spaces.hpp"

namespace nlforms {

enum class Verdict { pass, fail, inconclusive };
std::string to_string(Verdict v);

/// The two exponent bookkeepings for the weight-sum condition that the
/// source conventions leave ambiguous; both are always evaluated:
///   gamma_squared : coefficient beta^(2/p) gamma^2, threshold ~ gamma^-1
///   gamma_linear  : coefficient beta gamma,        threshold ~ gamma^(-1/p)
/// The overall verdict defaults to gamma_linear, the profile the worked
/// free-field example actually uses.
enum class SumProfile { gamma_squared, gamma_linear };
std::string to_string(SumProfile p);

/// Tail probability provider mu(|X_i| > t).
class TailSource {
  public:
    /// All tails identically zero.
    static TailSource zero();
    /// All tails identically one (the coefficient-only bookkeeping bound).
    static TailSource unit();
    /// Synthetic heavy tail min(1, t^-k), k >= 0.
    static TailSource synthetic_power(double k);
    /// Closed-form tails of a measure backend (exact for product/Gaussian).
    static TailSource closed_form(std::shared_ptr<const MeasureBackend> measure);
    /// Empirical tails from `samples` draws of the measure.
    static TailSource empirical(std::shared_ptr<const MeasureBackend> measure, long samples,
                                std::uint64_t seed);

    double prob(long i, double threshold) const;
    /// Exact power law of i -> prob(i, thresholds.at(i)) valid for all
    /// i > beyond, when one exists for this source/threshold combination.
    std::optional<PowerLaw> tail_law(const std::optional<PowerLaw>& threshold_law,
                                     long beyond) const;
    bool is_zero() const { return kind_ == Kind::zero; }
    bool has_sample_source() const { return measure_ != nullptr; }
    const MeasureBackend* measure() const { return measure_.get(); }
    long sample_count() const { return samples_; }
    std::uint64_t seed() const { return seed_; }

  private:
    enum class Kind { zero, unit, synthetic, closed_form, empirical };
    Kind kind_ = Kind::unit;
    double k_ = 1.0;
    std::shared_ptr<const MeasureBackend> measure_;
    long samples_ = 1000;
    std::uint64_t seed_ = 1;
    // Lazily drawn sample table for the empirical source.
    mutable std::shared_ptr<std::vector<std::vector<double>>> table_;
    void ensure_table() const;
};

/// L_{M,i} density-bound table for the order > 1 route.
class DensityBoundProvider {
  public:
    static DensityBoundProvider none();
    static DensityBoundProvider constant(double l);
    static DensityBoundProvider table(std::vector<long> m_grid,
                                      std::vector<std::vector<double>> l_rows);
    static DensityBoundProvider function(std::function<double(long, long)> f);

    bool available() const { return kind_ != Kind::none; }
    double at(long m, long i) const;
    /// Power law of i -> L_{M,i} at fixed M, when exact (constant tables).
    std::optional<PowerLaw> law_in_i(long m) const;

  private:
    enum class Kind { none, constant, table, function };
    Kind kind_ = Kind::none;
    double constant_ = 0.0;
    std::vector<long> m_grid_;
    std::vector<std::vector<double>> rows_;
    std::function<double(long, long)> fn_;
};

struct QRInput {
    WeightedSpaceSpec space = WeightedSpaceSpec::product(1);
    Sequence gamma;
    double m0 = 1.0;
    double alpha = 1.0;
    TailSource tails = TailSource::unit();
    DensityBoundProvider density_bounds = DensityBoundProvider::none();
    long dyadic_cap = 1L << 20;  // largest M probed on the dyadic grid
    std::uint64_t seed = 1;
};

struct ConditionReport {
    std::string id;
    Verdict verdict = Verdict::inconclusive;
    double partial_sum = 0.0;          // sum_{i<=N} coeff_i * tail_i
    double coeff_partial = 0.0;        // sum_{i<=N} coeff_i
    std::optional<SumBracket> coeff_bracket;    // coefficient series incl. tail
    std::optional<SumBracket> summand_bracket;  // full summand series when law-exact
    std::optional<double> fitted_exponent;      // observed-envelope slope
    std::optional<double> empirical_max;        // support-localization evidence
    std::string note;
};

struct QRReport {
    std::vector<ConditionReport> conditions;
    SumProfile verdict_profile = SumProfile::gamma_linear;
    Verdict verdict = Verdict::inconclusive;
    double alpha = 1.0;
    SpaceFlavor flavor = SpaceFlavor::lp;
    double p = 2.0;
    long n = 0;
    std::uint64_t seed = 1;
    // Dyadic probe of the order > 1 limit condition.
    std::vector<long> probe_m;
    std::vector<double> probe_value;
    std::optional<double> limsup_surrogate;

    const ConditionReport* find(const std::string& id) const;
    std::string format_table() const;
};

/// Weight-sum conditions for the weighted l^p state space, order <= 1.
QRReport check_lp_case(const QRInput& input);

/// Weight-sum conditions for the weighted sup-norm space, order <= 1;
/// requires gamma nondecreasing and unbounded.
QRReport check_linf_case(const QRInput& input);

/// Density-bound route for 1 < alpha < 2: the fixed-threshold sum plus the
/// M^-alpha scaled limit condition probed on a dyadic M grid (flavor picks
/// the lp / sup-norm / product variant).
QRReport check_alpha_gt1(const QRInput& input);

/// Parameter bindings of the worked examples: "example0" binds
/// (beta, gamma) = (lambda^4, lambda^-2), "example1" (lambda^6, lambda^-2).
/// Tails default to the unit bound; callers override as needed.
QRInput preset(const std::string& name, const EigenSequence& eig);

}  // namespace nlforms
