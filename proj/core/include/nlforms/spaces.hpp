#pragma once

#include <span>
#include <vector>

#include "nlforms/cylinder.hpp"
#include "nlforms/sequences.hpp"

namespace nlforms {

enum class SpaceFlavor { lp, linf, product };

/// Truncated weighted sequence space: l^p with weights beta_i, the weighted
/// sup-norm space, or the plain product space R^N carrying the summable
/// coordinate metric instead of a norm.
class WeightedSpaceSpec {
  public:
    static WeightedSpaceSpec lp(double p, Sequence weights);
    static WeightedSpaceSpec linf(Sequence weights);
    static WeightedSpaceSpec product(long dim);

    SpaceFlavor flavor() const { return flavor_; }
    double p() const { return p_; }
    long dim() const { return dim_; }
    const Sequence& weights() const { return weights_; }

  private:
    WeightedSpaceSpec() = default;
    SpaceFlavor flavor_ = SpaceFlavor::lp;
    double p_ = 2.0;
    long dim_ = 0;
    Sequence weights_;
};

/// (sum_i beta_i |x_i|^p)^(1/p) or sup_i beta_i |x_i|.
/// Product flavor has no norm; callers use product_metric instead.
double weighted_norm(std::span<const double> x, const WeightedSpaceSpec& space);

/// Metric of the product space: sum_k 2^-k ||x-y||_k / (1 + ||x-y||_k) with
/// ||.||_k the Euclidean norm of the first k coordinates.
double product_metric(std::span<const double> x, std::span<const double> y,
                      const WeightedSpaceSpec& space);

/// Non-increasing eigenvalue sequence 1 >= l_1 >= l_2 >= ... > 0 of the
/// inverse reference operator; everything spectral enters through it.
class EigenSequence {
  public:
    explicit EigenSequence(Sequence lambdas);

    /// lambda_i = i^-s, s >= 0.
    static EigenSequence power(double s, long n);

    long size() const { return lambdas_.size(); }
    double at(long i) const { return lambdas_.at(i); }
    const Sequence& lambdas() const { return lambdas_; }

    /// Bracket for sum_i lambda_i^2 including the tail beyond the truncation
    /// when the sequence carries a power law (infinite bracket otherwise).
    SumBracket squared_sum_bracket() const;

  private:
    Sequence lambdas_;
};

/// Coefficient vector of a level-m expansion: f = sum_i a_i (lambda_i^m phi_i).
struct SpectralVector {
    std::vector<double> coeffs;
    int level = 0;
};

/// Norm of f at its own level: the plain l2 norm of the coefficients.
double level_norm(const SpectralVector& f);

/// Isometry onto the weighted l2 space with beta_i = lambda_i^(-2m):
/// coefficients a_i map to x_i = lambda_i^m a_i.
std::vector<double> tau_map(const SpectralVector& f, const EigenSequence& eig);
SpectralVector tau_inverse(std::span<const double> x, const EigenSequence& eig, int level);

/// The image space of tau_map at the given level.
WeightedSpaceSpec tau_space(const EigenSequence& eig, int level);

/// Plateau bump eta: 1 on |x| <= 1, 0 on |x| >= 3, quintic-smoothstep
/// transition in between; 0 <= eta <= 1 and |eta'| <= 15/16 everywhere.
double plateau_bump(double x);

/// Sup of |eta'|; useful for Lipschitz bookkeeping of localized functions.
double plateau_bump_slope_bound();

/// Membership in the compact nest member D_M:
/// beta_i^(1/p) |x_i| <= M * i^-((1+delta)/p) for every i (1-based).
bool nest_contains(std::span<const double> x, long M, const WeightedSpaceSpec& space,
                   double delta = 1.0);

/// Cutoff localization: multiplies f by the per-coordinate bumps
/// eta(M^-1 i^((1+delta)/p) beta_i^(1/p) x_i). The result equals f on D_M
/// and vanishes outside D_{3M}.
CylinderFunction localize(const CylinderFunction& f, long M, const WeightedSpaceSpec& space,
                          double delta = 1.0);

std::vector<double> cesaro_mean(const std::vector<std::vector<double>>& seq, long m);
CylinderFunction cesaro_mean(const std::vector<CylinderFunction>& seq, long m);

}  // namespace nlforms
