#pragma once

#include <functional>
#include <span>
#include <vector>

namespace nlforms {

/// Smooth compactly supported function of finitely many coordinates.
///
/// Evaluation takes a full point of the (truncated) sequence space, gathers
/// the active coordinates and applies the box support: when support_radius
/// is positive the function is defined to vanish as soon as any active
/// coordinate leaves [-support_radius, support_radius]. support_radius == 0
/// means "no box" (constants and clipped projections that carry their decay
/// in the evaluator itself).
class CylinderFunction {
  public:
    using Eval = std::function<double(std::span<const double>)>;

    CylinderFunction(std::vector<int> active, Eval eval, double lipschitz,
                     double support_radius, double sup_bound);

    const std::vector<int>& active() const { return active_; }
    double lipschitz() const { return lipschitz_; }
    double support_radius() const { return support_radius_; }
    double sup_bound() const { return sup_bound_; }
    bool depends_on(int coordinate) const;

    /// Value at a full point; point must cover every active coordinate.
    double operator()(std::span<const double> point) const;

    /// Value from already-gathered active arguments (size == active().size()).
    double eval_args(std::span<const double> args) const;

    // --- built-in families, addressable by name from run configs ---

    static CylinderFunction constant(double value);

    /// x -> x_i on [-clip_radius, clip_radius], smoothly forced to zero
    /// beyond 3*clip_radius by the plateau bump.
    static CylinderFunction coordinate(int index, double clip_radius);

    /// Product of plateau bumps eta(x_j / width) over the given coordinates.
    static CylinderFunction bump_product(std::vector<int> indices, double width);

    /// One-variable polynomial sum_k coeffs[k] x^k clipped by eta(x/clip_radius).
    static CylinderFunction clipped_polynomial(int index, std::vector<double> coeffs,
                                               double clip_radius);

    /// Function taking the given values on an explicit finite point list
    /// (nearest-point lookup); used for discrete-state experiments.
    static CylinderFunction tabulated(std::vector<int> active,
                                      std::vector<std::vector<double>> points,
                                      std::vector<double> values);

  private:
    std::vector<int> active_;
    Eval eval_;
    double lipschitz_ = 0.0;
    double support_radius_ = 0.0;
    double sup_bound_ = 0.0;
};

}  // namespace nlforms
