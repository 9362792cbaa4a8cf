#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "nlforms/rng.hpp"
#include "nlforms/sequences.hpp"
#include "nlforms/spaces.hpp"

namespace nlforms {

struct McParams {
    long samples = 100000;
    std::uint64_t seed = 1;
};

struct TailEstimate {
    double value = 0.0;
    double se = 0.0;  // 0 for closed forms
    bool closed_form = true;
};

struct ComplexEstimate {
    std::complex<double> value;
    double se = 0.0;
    bool closed_form = true;
};

/// One-dimensional conditional law of a coordinate given the rest.
///
/// Either a finite atom list or a density. Densities are held unnormalized;
/// the normalizing constant comes from adaptive Simpson over an effective
/// support [lo, hi] widened until the unnormalized values at the ends drop
/// below 1e-14 of the maximum. Gaussian and uniform conditionals keep their
/// closed forms for exact sampling and moments.
class ConditionalDistribution1D {
  public:
    enum class Kind { atoms, density };

    static ConditionalDistribution1D from_atoms(std::vector<double> positions,
                                                std::vector<double> weights);
    static ConditionalDistribution1D gaussian(double mean, double var);
    static ConditionalDistribution1D uniform(double a, double b);
    static ConditionalDistribution1D from_unnormalized(std::function<double(double)> unnorm,
                                                       double center_hint, double scale_hint);

    Kind kind() const { return kind_; }

    /// Normalized density value; throws for atom kind.
    double pdf(double y) const;
    double cdf(double y) const;
    double sample(Rng& rng) const;
    double mean() const;
    double variance() const;
    /// P(|Y| > t).
    double tail_prob(double t) const;

    /// Normalizing constant of the unnormalized density (1 for closed forms).
    double normalization() const;
    double support_lo() const;
    double support_hi() const;

    const std::vector<double>& atom_positions() const;
    const std::vector<double>& atom_weights() const;

    /// Optional density bound cache (set by density_bound).
    std::optional<double> bound;

  private:
    struct GaussianForm {
        double mean, var;
    };
    struct UniformForm {
        double a, b;
    };
    struct GenericDensity {
        std::function<double(double)> unnorm;
        double lo = 0.0, hi = 0.0;
        double z = 0.0;
        // CDF table for inverse sampling, built on construction.
        std::vector<double> grid;
        std::vector<double> cdf;
    };

    Kind kind_ = Kind::atoms;
    std::vector<double> positions_, weights_;
    std::variant<std::monostate, GaussianForm, UniformForm, std::shared_ptr<GenericDensity>> form_;
};

/// Sup of the normalized conditional density over the interval [k_lo, k_hi],
/// by iterative grid refinement. Throws std::invalid_argument for atom kind:
/// the density route is unavailable for purely atomic conditionals.
double density_bound(const ConditionalDistribution1D& cond, double k_lo, double k_hi);

/// Second bound route: sup_{y in K} of the restricted singular moment
/// integral_K |y - y'|^(1 - 2 alpha) dmu(y'). May legitimately be infinite
/// for atomless conditionals when alpha >= 1; returned as +inf then.
double kernel_moment_bound(const ConditionalDistribution1D& cond, double k_lo, double k_hi,
                           double alpha);

/// Stream of draws from a measure; owns its RNG (and chain state, if any).
class Sampler {
  public:
    virtual ~Sampler() = default;
    virtual const std::vector<double>& next() = 0;
};

/// Probability measure on the truncated coordinate space with per-coordinate
/// conditional laws.
class MeasureBackend {
  public:
    virtual ~MeasureBackend() = default;

    virtual long dim() const = 0;
    virtual std::string describe() const = 0;

    virtual ConditionalDistribution1D conditional(long i,
                                                  std::span<const double> x) const = 0;

    /// True when conditional(i, .) genuinely depends on the conditioning
    /// point (Gibbs-type measures); false for product structure.
    virtual bool conditional_depends_on_state() const = 0;

    virtual bool finite_support() const { return false; }

    virtual std::unique_ptr<Sampler> make_sampler(std::uint64_t seed) const = 0;

    virtual TailEstimate tail_prob(long i, double t, const McParams& mc = {}) const = 0;

    virtual ComplexEstimate characteristic_fn(std::span<const double> phi,
                                              const McParams& mc = {}) const = 0;
};

/// One draw; convenience over make_sampler for single-shot use.
std::vector<double> sample(const MeasureBackend& measure, std::uint64_t seed);

// --- product measures -------------------------------------------------------

struct AtomsMarginal {
    std::vector<double> positions;
    std::vector<double> weights;
};
struct GaussianMarginal {
    double mean = 0.0;
    double var = 1.0;
};
struct UniformMarginal {
    double a = 0.0;
    double b = 1.0;
};
using Marginal1D = std::variant<AtomsMarginal, GaussianMarginal, UniformMarginal>;

class ProductMeasure : public MeasureBackend {
  public:
    explicit ProductMeasure(std::vector<Marginal1D> marginals);

    long dim() const override { return static_cast<long>(marginals_.size()); }
    std::string describe() const override;
    ConditionalDistribution1D conditional(long i, std::span<const double> x) const override;
    bool conditional_depends_on_state() const override { return false; }
    bool finite_support() const override;
    std::unique_ptr<Sampler> make_sampler(std::uint64_t seed) const override;
    TailEstimate tail_prob(long i, double t, const McParams& mc = {}) const override;
    ComplexEstimate characteristic_fn(std::span<const double> phi,
                                      const McParams& mc = {}) const override;

    const std::vector<Marginal1D>& marginals() const { return marginals_; }

  private:
    std::vector<Marginal1D> marginals_;
};

// --- centered Gaussian in spectral coordinates ------------------------------

class GaussianSpectralMeasure : public MeasureBackend {
  public:
    explicit GaussianSpectralMeasure(Sequence variances);

    /// Documented preset: coordinate variances lambda_i^2, which keeps
    /// sum beta_i sigma_i^2 finite on the weighted space with beta = lambda^4.
    static GaussianSpectralMeasure from_eigenvalues(const EigenSequence& eig);

    long dim() const override { return variances_.size(); }
    std::string describe() const override;
    ConditionalDistribution1D conditional(long i, std::span<const double> x) const override;
    bool conditional_depends_on_state() const override { return false; }
    std::unique_ptr<Sampler> make_sampler(std::uint64_t seed) const override;
    TailEstimate tail_prob(long i, double t, const McParams& mc = {}) const override;
    ComplexEstimate characteristic_fn(std::span<const double> phi,
                                      const McParams& mc = {}) const override;

    const Sequence& variances() const { return variances_; }

    /// sum_i beta_i sigma_i^2 over the ambient space, with the tail bracket
    /// when both sequences carry power laws.
    SumBracket weighted_variance_sum(const WeightedSpaceSpec& space) const;

  private:
    Sequence variances_;
};

// --- lattice quartic-interaction Gibbs measure ------------------------------

enum class LatticeBoundary { free_ends, periodic };

class LatticePhi4Measure : public MeasureBackend {
  public:
    struct Params {
        int d = 1;               // 1, 2 or 3
        double eps = 1.0;        // lattice spacing
        int side = 8;            // sites per axis
        double a_eps = 1.0;      // mass counter term
        double coupling = 0.0;   // quartic coupling, >= 0
        LatticeBoundary boundary = LatticeBoundary::free_ends;
        long burn_in = 2000;     // sweeps before a sampler reports draws
        long thin = 10;          // sweeps between reported draws
    };

    explicit LatticePhi4Measure(Params params);

    const Params& params() const { return params_; }
    long sites() const { return sites_; }
    const std::vector<std::vector<int>>& neighbors() const { return neighbors_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }

    /// Full lattice action; invariant under global sign flip of the field.
    double action(std::span<const double> phi) const;

    /// Energy terms involving site i only, with the site value replaced.
    double site_energy(long i, double value, std::span<const double> phi) const;

    long dim() const override { return sites_; }
    std::string describe() const override;
    ConditionalDistribution1D conditional(long i, std::span<const double> x) const override;
    bool conditional_depends_on_state() const override { return true; }
    std::unique_ptr<Sampler> make_sampler(std::uint64_t seed) const override;
    TailEstimate tail_prob(long i, double t, const McParams& mc = {}) const override;
    /// Not defined for Gibbs backends; throws.
    ComplexEstimate characteristic_fn(std::span<const double> phi,
                                      const McParams& mc = {}) const override;

  private:
    Params params_;
    long sites_ = 0;
    std::vector<std::vector<int>> neighbors_;
    std::vector<std::pair<int, int>> edges_;
};

struct SweepStats {
    long proposed = 0;
    long accepted = 0;
    double acceptance() const {
        return proposed == 0 ? 1.0 : static_cast<double>(accepted) / static_cast<double>(proposed);
    }
};

/// One full single-site Metropolis sweep with Gaussian proposals of the
/// given stddev; each site update is exactly reversible for exp(-S)/Z.
/// proposal_sd == 0 leaves the field unchanged and accepts everything.
SweepStats mcmc_step(const LatticePhi4Measure& measure, std::vector<double>& phi,
                     double proposal_sd, Rng& rng);

/// Sampler for the lattice measure: cold start, burn-in with the proposal
/// stddev tuned into the 0.3-0.5 acceptance band, then frozen (the frozen
/// chain is exactly reversible). Draws are thinned chain states, so they are
/// approximate samples; treat statistics accordingly.
class LatticeFieldSampler : public Sampler {
  public:
    LatticeFieldSampler(const LatticePhi4Measure& measure, std::uint64_t seed);
    const std::vector<double>& next() override;
    double proposal_sd() const { return sd_; }
    const SweepStats& stats() const { return stats_; }
    /// One thinning block; exposed for callers that track acceptance.
    SweepStats sweep_block(long sweeps);

  private:
    const LatticePhi4Measure& measure_;
    Rng rng_;
    std::vector<double> phi_;
    double sd_ = 1.0;
    SweepStats stats_;
};

}  // namespace nlforms
