#pragma once

#include <functional>

namespace nlforms {

/// Adaptive Simpson integration of f over [a, b].
///
/// The error budget is rel_tol times the whole-integral estimate with the
/// absolute floor abs_tol, so integrals that cancel to nearly zero still
/// terminate. Depth is capped; on cap the local estimate is accepted, which
/// keeps integrable endpoint singularities from recursing forever.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol = 1e-10, double abs_tol = 1e-14, int max_depth = 48);

/// Maximum of f over [a, b] by iterative grid refinement around the argmax.
/// Reliable for continuous f; for piecewise-constant f it returns the grid max.
struct GridMax {
    double arg = 0.0;
    double value = 0.0;
};
GridMax grid_maximum(const std::function<double(double)>& f, double a, double b,
                     int coarse_points = 2049, int refinements = 40);

}  // namespace nlforms
