#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nlforms/cylinder.hpp"
#include "nlforms/measures.hpp"

namespace nlforms {

/// Two kernel exponent conventions coexist and are never silently merged:
/// `fractional` uses |y - y'|^-(2 alpha + 1) (order-alpha fractional
/// Laplacian bookkeeping); `stable` uses |y - y'|^-(1 + alpha) (alpha-stable
/// bookkeeping). Default is fractional.
enum class KernelProfile { fractional, stable };

struct FormConfig {
    double alpha = 1.0;                              // in (0, 2)
    KernelProfile profile = KernelProfile::fractional;
    long mc_samples = 20000;                         // outer draws
    long inner_samples = 8;                          // inner draws per outer
    std::uint64_t seed = 1;
    bool force_mc = false;  // skip the exact finite-support route (self-checks)

    void validate() const;
};

double kernel_exponent(const FormConfig& cfg);
/// 1 / dist^exponent for dist > 0.
double kernel_value(const FormConfig& cfg, double dist);

/// Two-point kernel term: increments of u and v in coordinate i between the
/// substituted values y and y', divided by |y - y'|^exponent. Symmetric in
/// (y, y'), zero whenever u or v does not depend on coordinate i, and
/// undefined on the diagonal y == y' (throws).
double phi_alpha_kernel(const CylinderFunction& u, const CylinderFunction& v, double y,
                        double y_prime, std::span<const double> x, long i,
                        const FormConfig& cfg);

struct FormEstimate {
    double value = 0.0;
    double se = 0.0;
    bool exact = false;
    /// Set when the fractional profile is used with alpha > 1/2 against an
    /// atomless conditional: the integrand can be unbounded there.
    bool unbounded_kernel_warning = false;
};

/// Single-coordinate form value. Finite-support product measures are summed
/// exactly; product-type measures use the symmetrized two-draw conditional
/// estimator; Gibbs-type measures pair chain states with one conditional
/// draw. Deterministic given cfg.seed.
FormEstimate form_coordinate(const CylinderFunction& u, const CylinderFunction& v, long i,
                             const MeasureBackend& measure, const FormConfig& cfg);

/// Sum of form_coordinate over the union of active coordinates of u and v
/// (everything else contributes exactly zero); standard errors combine in
/// quadrature, per-coordinate contributions reduce in fixed index order.
FormEstimate form_total(const CylinderFunction& u, const CylinderFunction& v,
                        const MeasureBackend& measure, const FormConfig& cfg);

/// Discrete state space with strictly positive stationary weights.
struct DiscreteStateSpace {
    std::vector<std::vector<double>> states;  // distinct points of R^k
    std::vector<double> mu;                   // > 0, sums to 1 within 1e-12

    DiscreteStateSpace(std::vector<std::vector<double>> states_, std::vector<double> mu_);
    long size() const { return static_cast<long>(states.size()); }
    /// Euclidean distance between two states.
    double distance(long a, long b) const;
};

/// Exact double sum  sum_{x != y} K(x, y) (u(x)-u(y)) (v(x)-v(y)) mu(x) mu(y)
/// over the finite state space. Symmetric in (u, v), nonnegative on the
/// diagonal u == v.
double discrete_form_exact(std::span<const double> u_values, std::span<const double> v_values,
                           const DiscreteStateSpace& space, const FormConfig& cfg);
double discrete_form_exact(const CylinderFunction& u, const CylinderFunction& v,
                           const DiscreteStateSpace& space, const FormConfig& cfg);

/// form(u, 1): identically zero integrand. Exact 0 on discrete instances;
/// the MC path reports an estimate whose samples are all zero (SE == 0).
FormEstimate dirichlet_test(const CylinderFunction& u, const MeasureBackend& measure,
                            const FormConfig& cfg);
double dirichlet_residual_discrete(std::span<const double> u_values,
                                   const DiscreteStateSpace& space, const FormConfig& cfg);

/// Normal contraction: identity on [0, 1], range within [-eps, 1 + eps],
/// 0 <= phi(t') - phi(t) <= t' - t for t < t'. Saturation outside [0, 1] is
/// exponential, so the map stays C^1 with derivative in (0, 1].
class NormalContraction {
  public:
    explicit NormalContraction(double eps);
    double operator()(double t) const;
    double epsilon() const { return eps_; }

  private:
    double eps_;
};

/// Composition phi_eps(u); keeps u's active set, Lipschitz constant and
/// support box (phi_eps(0) == 0).
CylinderFunction contract(const CylinderFunction& u, const NormalContraction& phi);

}  // namespace nlforms
