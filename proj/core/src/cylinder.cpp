#include "nlforms/cylinder.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "nlforms/spaces.hpp"

namespace nlforms {

CylinderFunction::CylinderFunction(std::vector<int> active, Eval eval, double lipschitz,
                                   double support_radius, double sup_bound)
    : active_(std::move(active)),
      eval_(std::move(eval)),
      lipschitz_(lipschitz),
      support_radius_(support_radius),
      sup_bound_(sup_bound) {
    if (!eval_) throw std::invalid_argument("CylinderFunction: null evaluator");
    if (lipschitz_ < 0.0) throw std::invalid_argument("CylinderFunction: negative Lipschitz constant");
    if (support_radius_ < 0.0) throw std::invalid_argument("CylinderFunction: negative support radius");
    for (int i : active_)
        if (i < 0) throw std::invalid_argument("CylinderFunction: negative coordinate index");
}

bool CylinderFunction::depends_on(int coordinate) const {
    return std::find(active_.begin(), active_.end(), coordinate) != active_.end();
}

double CylinderFunction::operator()(std::span<const double> point) const {
    if (active_.empty()) return eval_args({});
    // Composed functions (localized, contracted, averaged) re-enter this
    // gather path, so scratch buffers are a fixed-depth pool with stable
    // addresses rather than one shared thread_local vector.
    constexpr int kMaxDepth = 32;
    thread_local std::array<std::vector<double>, kMaxDepth> pool;
    thread_local int depth = 0;
    if (depth >= kMaxDepth)
        throw std::runtime_error("CylinderFunction: composition nesting too deep");
    std::vector<double>& args = pool[static_cast<std::size_t>(depth)];
    args.clear();
    args.reserve(active_.size());
    for (int i : active_) {
        if (static_cast<std::size_t>(i) >= point.size())
            throw std::out_of_range("CylinderFunction: point does not cover active coordinate");
        args.push_back(point[static_cast<std::size_t>(i)]);
    }
    ++depth;
    double result;
    try {
        result = eval_args(args);
    } catch (...) {
        --depth;
        throw;
    }
    --depth;
    return result;
}

double CylinderFunction::eval_args(std::span<const double> args) const {
    if (args.size() != active_.size())
        throw std::invalid_argument("CylinderFunction::eval_args: argument count mismatch");
    if (support_radius_ > 0.0) {
        for (double a : args)
            if (std::abs(a) > support_radius_) return 0.0;
    }
    return eval_(args);
}

CylinderFunction CylinderFunction::constant(double value) {
    return CylinderFunction({}, [value](std::span<const double>) { return value; }, 0.0, 0.0,
                            std::abs(value));
}

CylinderFunction CylinderFunction::coordinate(int index, double clip_radius) {
    if (!(clip_radius > 0.0))
        throw std::invalid_argument("CylinderFunction::coordinate: clip_radius must be > 0");
    const double r = clip_radius;
    auto eval = [r](std::span<const double> a) { return a[0] * plateau_bump(a[0] / r); };
    // |d/dx (x eta(x/r))| <= 1 + 3r * slope/r
    const double lip = 1.0 + 3.0 * plateau_bump_slope_bound();
    return CylinderFunction({index}, eval, lip, 0.0, 3.0 * r);
}

CylinderFunction CylinderFunction::bump_product(std::vector<int> indices, double width) {
    if (!(width > 0.0))
        throw std::invalid_argument("CylinderFunction::bump_product: width must be > 0");
    if (indices.empty())
        throw std::invalid_argument("CylinderFunction::bump_product: no coordinates");
    const double w = width;
    auto eval = [w](std::span<const double> a) {
        double prod = 1.0;
        for (double x : a) {
            prod *= plateau_bump(x / w);
            if (prod == 0.0) break;
        }
        return prod;
    };
    const double lip =
        std::sqrt(static_cast<double>(indices.size())) * plateau_bump_slope_bound() / width;
    return CylinderFunction(std::move(indices), eval, lip, 3.0 * width, 1.0);
}

CylinderFunction CylinderFunction::clipped_polynomial(int index, std::vector<double> coeffs,
                                                      double clip_radius) {
    if (!(clip_radius > 0.0))
        throw std::invalid_argument("CylinderFunction::clipped_polynomial: clip_radius must be > 0");
    if (coeffs.empty())
        throw std::invalid_argument("CylinderFunction::clipped_polynomial: no coefficients");
    const double r = clip_radius;
    auto poly = [coeffs](double x) {
        double acc = 0.0;
        for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * x + coeffs[k];
        return acc;
    };
    auto eval = [poly, r](std::span<const double> a) {
        return poly(a[0]) * plateau_bump(a[0] / r);
    };
    // Grid estimates of sup|g| and sup|g'| over the support, inflated a little.
    const int n = 20001;
    double sup = 0.0;
    double lip = 0.0;
    double prev = 0.0;
    const double h = 6.0 * r / (n - 1);
    for (int k = 0; k < n; ++k) {
        const double x = -3.0 * r + h * k;
        const double v = poly(x) * plateau_bump(x / r);
        sup = std::max(sup, std::abs(v));
        if (k > 0) lip = std::max(lip, std::abs(v - prev) / h);
        prev = v;
    }
    return CylinderFunction({index}, eval, 1.1 * lip + 1e-12, 3.0 * r, 1.05 * sup);
}

CylinderFunction CylinderFunction::tabulated(std::vector<int> active,
                                             std::vector<std::vector<double>> points,
                                             std::vector<double> values) {
    if (points.size() != values.size() || points.empty())
        throw std::invalid_argument("CylinderFunction::tabulated: points/values mismatch");
    for (const auto& p : points)
        if (p.size() != active.size())
            throw std::invalid_argument("CylinderFunction::tabulated: point arity mismatch");
    auto table = std::make_shared<std::pair<std::vector<std::vector<double>>, std::vector<double>>>(
        std::move(points), std::move(values));
    auto eval = [table](std::span<const double> a) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t k = 0; k < table->first.size(); ++k) {
            double d2 = 0.0;
            for (std::size_t j = 0; j < a.size(); ++j) {
                const double diff = a[j] - table->first[k][j];
                d2 += diff * diff;
            }
            if (d2 < best) {
                best = d2;
                arg = k;
            }
        }
        return table->second[arg];
    };
    // Nearest-point tables are piecewise constant; report the worst ratio of
    // value gap to point gap as the working Lipschitz constant.
    double lip = 0.0;
    double sup = 0.0;
    const auto& pts = table->first;
    const auto& vals = table->second;
    for (std::size_t a = 0; a < pts.size(); ++a) {
        sup = std::max(sup, std::abs(vals[a]));
        for (std::size_t b = a + 1; b < pts.size(); ++b) {
            double d2 = 0.0;
            for (std::size_t j = 0; j < pts[a].size(); ++j) {
                const double diff = pts[a][j] - pts[b][j];
                d2 += diff * diff;
            }
            if (d2 > 0.0) lip = std::max(lip, std::abs(vals[a] - vals[b]) / std::sqrt(d2));
        }
    }
    return CylinderFunction(std::move(active), eval, lip, 0.0, sup);
}

}  // namespace nlforms
