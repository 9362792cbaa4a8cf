#include "nlforms/quadrature.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace nlforms {

namespace {

double simpson(double fa, double fm, double fb, double h) {
    return (h / 6.0) * (fa + 4.0 * fm + fb);
}

double adaptive_step(const std::function<double(double)>& f, double a, double b, double fa,
                     double fm, double fb, double whole, double eps, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(fa, flm, fm, m - a);
    const double right = simpson(fm, frm, fb, b - m);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * eps) {
        return left + right + delta / 15.0;
    }
    return adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
           adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol, double abs_tol, int max_depth) {
    if (!(a <= b)) throw std::invalid_argument("adaptive_simpson: requires a <= b");
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fm = f(m);
    const double fb = f(b);
    const double whole = simpson(fa, fm, fb, b - a);
    const double eps = std::max(rel_tol * std::abs(whole), abs_tol);
    return adaptive_step(f, a, b, fa, fm, fb, whole, eps, max_depth);
}

GridMax grid_maximum(const std::function<double(double)>& f, double a, double b,
                     int coarse_points, int refinements) {
    if (!(a < b)) throw std::invalid_argument("grid_maximum: requires a < b");
    if (coarse_points < 3) coarse_points = 3;
    double lo = a;
    double hi = b;
    GridMax best;
    best.arg = a;
    best.value = f(a);
    int points = coarse_points;
    for (int round = 0; round <= refinements; ++round) {
        const double step = (hi - lo) / static_cast<double>(points - 1);
        int argmax = 0;
        double valmax = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < points; ++k) {
            const double x = lo + step * k;
            const double v = f(x);
            if (v > valmax) {
                valmax = v;
                argmax = k;
            }
        }
        if (valmax > best.value) {
            best.value = valmax;
            best.arg = lo + step * argmax;
        }
        // Shrink to the two cells around the winner, clamped to [a, b].
        const double c = lo + step * argmax;
        lo = std::max(a, c - step);
        hi = std::min(b, c + step);
        if (hi - lo <= 0.0) break;
        points = 33;
    }
    return best;
}

}  // namespace nlforms
