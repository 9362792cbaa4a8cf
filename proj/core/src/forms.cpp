#include "nlforms/forms.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>
#include <stdexcept>

namespace nlforms {

void FormConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 2.0))
        throw std::invalid_argument("FormConfig: alpha must be in (0, 2)");
    if (mc_samples < 1 || inner_samples < 1)
        throw std::invalid_argument("FormConfig: sample counts must be >= 1");
}

double kernel_exponent(const FormConfig& cfg) {
    return cfg.profile == KernelProfile::fractional ? 2.0 * cfg.alpha + 1.0 : 1.0 + cfg.alpha;
}

double kernel_value(const FormConfig& cfg, double dist) {
    if (!(dist > 0.0)) throw std::domain_error("kernel_value: distance must be > 0");
    return std::pow(dist, -kernel_exponent(cfg));
}

double phi_alpha_kernel(const CylinderFunction& u, const CylinderFunction& v, double y,
                        double y_prime, std::span<const double> x, long i,
                        const FormConfig& cfg) {
    cfg.validate();
    if (y == y_prime)
        throw std::domain_error("phi_alpha_kernel: y == y' is excluded from the kernel");
    if (!u.depends_on(static_cast<int>(i)) || !v.depends_on(static_cast<int>(i))) return 0.0;

    thread_local std::vector<double> point;
    point.assign(x.begin(), x.end());
    if (static_cast<std::size_t>(i) >= point.size()) point.resize(static_cast<std::size_t>(i) + 1, 0.0);

    point[static_cast<std::size_t>(i)] = y;
    const double uy = u(point);
    const double vy = v(point);
    point[static_cast<std::size_t>(i)] = y_prime;
    const double uyp = u(point);
    const double vyp = v(point);

    return (uy - uyp) * (vy - vyp) * kernel_value(cfg, std::abs(y - y_prime));
}

namespace {

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe mean_and_se(const std::vector<double>& samples) {
    MeanSe out;
    const double n = static_cast<double>(samples.size());
    for (double s : samples) out.mean += s;
    out.mean /= n;
    if (samples.size() > 1) {
        double ss = 0.0;
        for (double s : samples) {
            const double d = s - out.mean;
            ss += d * d;
        }
        out.se = std::sqrt(ss / (n * (n - 1.0)));
    }
    return out;
}

/// Exact single-coordinate sum for finite-support product measures:
/// enumerate the atoms of every coordinate that u, v or the kernel reads.
double exact_coordinate_sum(const CylinderFunction& u, const CylinderFunction& v, long i,
                            const ProductMeasure& measure, const FormConfig& cfg) {
    std::set<int> touched(u.active().begin(), u.active().end());
    touched.insert(v.active().begin(), v.active().end());
    touched.insert(static_cast<int>(i));
    std::vector<int> coords(touched.begin(), touched.end());

    double combos = 1.0;
    for (int c : coords) {
        const auto& atoms = std::get<AtomsMarginal>(measure.marginals()[static_cast<std::size_t>(c)]);
        combos *= static_cast<double>(atoms.positions.size());
    }
    if (combos > 2e7)
        throw std::invalid_argument("form_coordinate: exact enumeration too large; use MC sampling");

    const auto& atoms_i = std::get<AtomsMarginal>(measure.marginals()[static_cast<std::size_t>(i)]);

    std::vector<double> point(static_cast<std::size_t>(measure.dim()), 0.0);
    std::vector<std::size_t> idx(coords.size(), 0);
    double total = 0.0;
    while (true) {
        double outer_w = 1.0;
        for (std::size_t k = 0; k < coords.size(); ++k) {
            const auto& a =
                std::get<AtomsMarginal>(measure.marginals()[static_cast<std::size_t>(coords[k])]);
            point[static_cast<std::size_t>(coords[k])] = a.positions[idx[k]];
            outer_w *= a.weights[idx[k]];
        }
        const double xi = point[static_cast<std::size_t>(i)];
        double inner = 0.0;
        for (std::size_t j = 0; j < atoms_i.positions.size(); ++j) {
            const double y = atoms_i.positions[j];
            if (y == xi) continue;
            inner += atoms_i.weights[j] * phi_alpha_kernel(u, v, y, xi, point, i, cfg);
        }
        total += outer_w * inner;

        std::size_t k = 0;
        for (; k < coords.size(); ++k) {
            const auto& a =
                std::get<AtomsMarginal>(measure.marginals()[static_cast<std::size_t>(coords[k])]);
            if (++idx[k] < a.positions.size()) break;
            idx[k] = 0;
        }
        if (k == coords.size()) break;
    }
    return total;
}

}  // namespace

FormEstimate form_coordinate(const CylinderFunction& u, const CylinderFunction& v, long i,
                             const MeasureBackend& measure, const FormConfig& cfg) {
    cfg.validate();
    if (i < 0 || i >= measure.dim())
        throw std::out_of_range("form_coordinate: coordinate index outside the measure");

    FormEstimate out;
    // The increments vanish identically unless both u and v read coordinate i.
    const bool live = u.depends_on(static_cast<int>(i)) && v.depends_on(static_cast<int>(i));

    if (measure.finite_support() && !cfg.force_mc) {
        const auto* prod = dynamic_cast<const ProductMeasure*>(&measure);
        if (prod == nullptr)
            throw std::invalid_argument("form_coordinate: finite support requires a product measure");
        out.value = live ? exact_coordinate_sum(u, v, i, *prod, cfg) : 0.0;
        out.se = 0.0;
        out.exact = true;
        return out;
    }

    {
        // Unboundedness advisory for the steep kernel against a density.
        const auto probe = measure.conditional(
            i, std::vector<double>(static_cast<std::size_t>(measure.dim()), 0.0));
        out.unbounded_kernel_warning = cfg.profile == KernelProfile::fractional &&
                                       cfg.alpha > 0.5 &&
                                       probe.kind() == ConditionalDistribution1D::Kind::density;
    }

    auto sampler = measure.make_sampler(cfg.seed);
    Rng inner_rng(Rng::derive(cfg.seed, 0x10000 + static_cast<std::uint64_t>(i)));
    std::vector<double> outer_means;
    outer_means.reserve(static_cast<std::size_t>(cfg.mc_samples));

    if (!measure.conditional_depends_on_state()) {
        // Symmetrized estimator: two fresh conditional draws per term.
        const auto cond = measure.conditional(
            i, std::vector<double>(static_cast<std::size_t>(measure.dim()), 0.0));
        for (long s = 0; s < cfg.mc_samples; ++s) {
            const auto& x = sampler->next();
            double acc = 0.0;
            for (long k = 0; k < cfg.inner_samples; ++k) {
                const double y = cond.sample(inner_rng);
                const double yp = cond.sample(inner_rng);
                if (y == yp) continue;
                if (live) acc += phi_alpha_kernel(u, v, y, yp, x, i, cfg);
            }
            outer_means.push_back(acc / static_cast<double>(cfg.inner_samples));
        }
    } else {
        // Chain states paired with single conditional draws.
        for (long s = 0; s < cfg.mc_samples; ++s) {
            const auto& x = sampler->next();
            const auto cond = measure.conditional(i, x);
            double acc = 0.0;
            for (long k = 0; k < cfg.inner_samples; ++k) {
                const double y = cond.sample(inner_rng);
                if (y == x[static_cast<std::size_t>(i)]) continue;
                if (live)
                    acc += phi_alpha_kernel(u, v, y, x[static_cast<std::size_t>(i)], x, i, cfg);
            }
            outer_means.push_back(acc / static_cast<double>(cfg.inner_samples));
        }
    }

    const MeanSe ms = mean_and_se(outer_means);
    out.value = ms.mean;
    out.se = ms.se;
    out.exact = false;
    return out;
}

FormEstimate form_total(const CylinderFunction& u, const CylinderFunction& v,
                        const MeasureBackend& measure, const FormConfig& cfg) {
    cfg.validate();
    std::set<int> coords(u.active().begin(), u.active().end());
    coords.insert(v.active().begin(), v.active().end());

    FormEstimate out;
    out.exact = true;
    double se_sq = 0.0;
    for (int i : coords) {  // std::set iterates in fixed increasing order
        const FormEstimate e = form_coordinate(u, v, i, measure, cfg);
        out.value += e.value;
        se_sq += e.se * e.se;
        out.exact = out.exact && e.exact;
        out.unbounded_kernel_warning = out.unbounded_kernel_warning || e.unbounded_kernel_warning;
    }
    out.se = std::sqrt(se_sq);
    if (coords.empty()) out.exact = true;
    return out;
}

DiscreteStateSpace::DiscreteStateSpace(std::vector<std::vector<double>> states_,
                                       std::vector<double> mu_)
    : states(std::move(states_)), mu(std::move(mu_)) {
    if (states.empty() || states.size() != mu.size())
        throw std::invalid_argument("DiscreteStateSpace: states/mu length mismatch");
    const std::size_t arity = states.front().size();
    double total = 0.0;
    for (double w : mu) {
        if (!(w > 0.0)) throw std::invalid_argument("DiscreteStateSpace: weights must be > 0");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("DiscreteStateSpace: weights must sum to 1");
    for (const auto& s : states)
        if (s.size() != arity) throw std::invalid_argument("DiscreteStateSpace: ragged states");
    for (long a = 0; a < size(); ++a)
        for (long b = a + 1; b < size(); ++b)
            if (distance(a, b) == 0.0)
                throw std::invalid_argument("DiscreteStateSpace: coincident states");
}

double DiscreteStateSpace::distance(long a, long b) const {
    const auto& pa = states[static_cast<std::size_t>(a)];
    const auto& pb = states[static_cast<std::size_t>(b)];
    double acc = 0.0;
    for (std::size_t j = 0; j < pa.size(); ++j) {
        const double d = pa[j] - pb[j];
        acc += d * d;
    }
    return std::sqrt(acc);
}

double discrete_form_exact(std::span<const double> u_values, std::span<const double> v_values,
                           const DiscreteStateSpace& space, const FormConfig& cfg) {
    cfg.validate();
    if (static_cast<long>(u_values.size()) != space.size() ||
        static_cast<long>(v_values.size()) != space.size())
        throw std::invalid_argument("discrete_form_exact: value vector length mismatch");
    double total = 0.0;
    for (long a = 0; a < space.size(); ++a) {
        for (long b = a + 1; b < space.size(); ++b) {
            const double k = kernel_value(cfg, space.distance(a, b));
            const double du = u_values[static_cast<std::size_t>(a)] - u_values[static_cast<std::size_t>(b)];
            const double dv = v_values[static_cast<std::size_t>(a)] - v_values[static_cast<std::size_t>(b)];
            total += 2.0 * k * du * dv * space.mu[static_cast<std::size_t>(a)] *
                     space.mu[static_cast<std::size_t>(b)];
        }
    }
    return total;
}

double discrete_form_exact(const CylinderFunction& u, const CylinderFunction& v,
                           const DiscreteStateSpace& space, const FormConfig& cfg) {
    std::vector<double> uv(static_cast<std::size_t>(space.size()));
    std::vector<double> vv(static_cast<std::size_t>(space.size()));
    for (long s = 0; s < space.size(); ++s) {
        uv[static_cast<std::size_t>(s)] = u(space.states[static_cast<std::size_t>(s)]);
        vv[static_cast<std::size_t>(s)] = v(space.states[static_cast<std::size_t>(s)]);
    }
    return discrete_form_exact(uv, vv, space, cfg);
}

FormEstimate dirichlet_test(const CylinderFunction& u, const MeasureBackend& measure,
                            const FormConfig& cfg) {
    return form_total(u, CylinderFunction::constant(1.0), measure, cfg);
}

double dirichlet_residual_discrete(std::span<const double> u_values,
                                   const DiscreteStateSpace& space, const FormConfig& cfg) {
    const std::vector<double> ones(static_cast<std::size_t>(space.size()), 1.0);
    return discrete_form_exact(u_values, ones, space, cfg);
}

NormalContraction::NormalContraction(double eps) : eps_(eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("NormalContraction: eps must be > 0");
}

double NormalContraction::operator()(double t) const {
    if (t >= 0.0 && t <= 1.0) return t;
    if (t > 1.0) return 1.0 + eps_ * (1.0 - std::exp(-(t - 1.0) / eps_));
    return -eps_ * (1.0 - std::exp(t / eps_));
}

CylinderFunction contract(const CylinderFunction& u, const NormalContraction& phi) {
    auto inner = std::make_shared<CylinderFunction>(u);
    const NormalContraction map = phi;
    auto eval = [inner, map](std::span<const double> args) { return map(inner->eval_args(args)); };
    const double sup = std::min(u.sup_bound(), 1.0 + phi.epsilon());
    return CylinderFunction(u.active(), eval, u.lipschitz(), u.support_radius(), sup);
}

}  // namespace nlforms
