#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "nlforms/forms.hpp"
#include "nlforms/generators.hpp"
#include "nlforms/rng.hpp"

using namespace nlforms;

namespace {

ProductMeasure two_atom_measure(double p) {
    // One coordinate: atom +1/2 with weight p, atom -1/2 with weight 1-p.
    return ProductMeasure({AtomsMarginal{{0.5, -0.5}, {p, 1.0 - p}}});
}

CylinderFunction indicator_plus_half() {
    // 1 at +1/2, 0 at -1/2 (nearest-point table on one coordinate).
    return CylinderFunction::tabulated({0}, {{0.5}, {-0.5}}, {1.0, 0.0});
}

/// Independent per-coordinate oracle for finite-support product measures:
/// full product-space enumeration, one moving coordinate at a time.
double coordinate_form_oracle(const CylinderFunction& u, const CylinderFunction& v, long i,
                              const ProductMeasure& measure, const FormConfig& cfg) {
    std::vector<const AtomsMarginal*> atoms;
    for (const auto& m : measure.marginals()) atoms.push_back(&std::get<AtomsMarginal>(m));
    const long n = measure.dim();
    std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
    std::vector<double> x(static_cast<std::size_t>(n));
    double total = 0.0;
    while (true) {
        double w = 1.0;
        for (long c = 0; c < n; ++c) {
            x[static_cast<std::size_t>(c)] =
                atoms[static_cast<std::size_t>(c)]->positions[idx[static_cast<std::size_t>(c)]];
            w *= atoms[static_cast<std::size_t>(c)]->weights[idx[static_cast<std::size_t>(c)]];
        }
        std::vector<double> moved = x;
        for (std::size_t j = 0; j < atoms[static_cast<std::size_t>(i)]->positions.size(); ++j) {
            const double y = atoms[static_cast<std::size_t>(i)]->positions[j];
            if (y == x[static_cast<std::size_t>(i)]) continue;
            moved[static_cast<std::size_t>(i)] = y;
            const double du = u(moved) - u(x);
            const double dv = v(moved) - v(x);
            const double dist = std::abs(y - x[static_cast<std::size_t>(i)]);
            total += w * atoms[static_cast<std::size_t>(i)]->weights[j] * du * dv *
                     std::pow(dist, -kernel_exponent(cfg));
        }
        long c = 0;
        for (; c < n; ++c) {
            if (++idx[static_cast<std::size_t>(c)] <
                atoms[static_cast<std::size_t>(c)]->positions.size())
                break;
            idx[static_cast<std::size_t>(c)] = 0;
        }
        if (c == n) break;
    }
    return total;
}

}  // namespace

TEST_SUITE("forms") {

TEST_CASE("kernel term by direct substitution") {
    FormConfig cfg;
    const auto u = CylinderFunction::coordinate(0, 10.0);
    const std::vector<double> x{0.0};

    SUBCASE("constants contribute nothing") {
        const auto c = CylinderFunction::constant(3.0);
        CHECK(phi_alpha_kernel(c, u, 1.0, 0.0, x, 0, cfg) == 0.0);
        CHECK(phi_alpha_kernel(u, c, 1.0, 0.0, x, 0, cfg) == 0.0);
    }

    SUBCASE("linear increments, fractional exponent") {
        cfg.alpha = 0.5;
        cfg.profile = KernelProfile::fractional;  // exponent 2*0.5 + 1 = 2
        CHECK(phi_alpha_kernel(u, u, 1.0, 0.0, x, 0, cfg) == doctest::Approx(1.0));
    }

    SUBCASE("linear increments, stable exponent") {
        cfg.alpha = 0.5;
        cfg.profile = KernelProfile::stable;  // exponent 1.5
        CHECK(phi_alpha_kernel(u, u, 1.0, 0.0, x, 0, cfg) == doctest::Approx(1.0));
        CHECK(phi_alpha_kernel(u, u, 2.0, 0.0, x, 0, cfg) ==
              doctest::Approx(4.0 / std::pow(2.0, 1.5)));
    }

    SUBCASE("symmetric in the two substituted values") {
        cfg.alpha = 0.8;
        const double a = phi_alpha_kernel(u, u, 1.3, -0.4, x, 0, cfg);
        const double b = phi_alpha_kernel(u, u, -0.4, 1.3, x, 0, cfg);
        CHECK(a == doctest::Approx(b).epsilon(1e-15));
    }

    SUBCASE("vanishes when the coordinate is inactive") {
        const auto w = CylinderFunction::coordinate(2, 10.0);
        const std::vector<double> big{0.0, 0.0, 0.0};
        CHECK(phi_alpha_kernel(u, w, 1.0, 0.0, big, 0, cfg) == 0.0);
    }

    SUBCASE("diagonal is excluded") {
        CHECK_THROWS_AS(phi_alpha_kernel(u, u, 0.7, 0.7, x, 0, cfg), std::domain_error);
    }
}

TEST_CASE("single-coordinate form on the two-atom measure") {
    FormConfig cfg;
    cfg.profile = KernelProfile::stable;
    cfg.alpha = 0.7;
    const auto measure = two_atom_measure(0.3);
    const auto u = indicator_plus_half();

    SUBCASE("constants give exactly zero") {
        const auto c = CylinderFunction::constant(2.0);
        const FormEstimate e = form_coordinate(c, c, 0, measure, cfg);
        CHECK(e.value == 0.0);
        CHECK(e.se == 0.0);
        CHECK(e.exact);
    }

    SUBCASE("closed-form value 2 p (1-p)") {
        const FormEstimate e = form_coordinate(u, u, 0, measure, cfg);
        CHECK(e.exact);
        CHECK(e.value == doctest::Approx(0.42).epsilon(1e-14));
    }

    SUBCASE("MC agrees within three standard errors") {
        FormConfig mc = cfg;
        mc.force_mc = true;
        mc.mc_samples = 20000;
        mc.inner_samples = 4;
        mc.seed = 7;
        const FormEstimate e = form_coordinate(u, u, 0, measure, mc);
        CHECK_FALSE(e.exact);
        REQUIRE(e.se > 0.0);
        CHECK(std::abs(e.value - 0.42) <= 3.0 * e.se);
    }

    SUBCASE("coordinate index is validated") {
        CHECK_THROWS_AS(form_coordinate(u, u, 1, measure, cfg), std::out_of_range);
    }
}

TEST_CASE("total form") {
    FormConfig cfg;
    cfg.profile = KernelProfile::stable;
    cfg.alpha = 0.5;

    SUBCASE("no active coordinates: zero") {
        const auto measure = two_atom_measure(0.4);
        const auto c = CylinderFunction::constant(5.0);
        const FormEstimate e = form_total(c, c, measure, cfg);
        CHECK(e.value == 0.0);
        CHECK(e.se == 0.0);
    }

    SUBCASE("disjoint active sets: cross terms vanish exactly") {
        const ProductMeasure measure({AtomsMarginal{{1.0, -1.0}, {0.5, 0.5}},
                                      AtomsMarginal{{0.5, -0.5}, {0.4, 0.6}}});
        const auto u = CylinderFunction::coordinate(0, 10.0);
        const auto v = CylinderFunction::coordinate(1, 10.0);
        const FormEstimate cross = form_total(u, v, measure, cfg);
        CHECK(cross.value == 0.0);

        // Diagonal terms against the independent per-coordinate oracle.
        const FormEstimate uu = form_total(u, u, measure, cfg);
        const double oracle0 = coordinate_form_oracle(u, u, 0, measure, cfg);
        CHECK(uu.value == doctest::Approx(oracle0).epsilon(1e-13));
        const FormEstimate vv = form_total(v, v, measure, cfg);
        const double oracle1 = coordinate_form_oracle(v, v, 1, measure, cfg);
        CHECK(vv.value == doctest::Approx(oracle1).epsilon(1e-13));
    }

    SUBCASE("bilinearity under scaling") {
        const auto measure = two_atom_measure(0.35);
        const auto u = CylinderFunction::clipped_polynomial(0, {0.0, 1.0}, 10.0);
        const auto u2 = CylinderFunction::clipped_polynomial(0, {0.0, 2.0}, 10.0);
        const FormEstimate once = form_total(u, u, measure, cfg);
        const FormEstimate twice = form_total(u2, u, measure, cfg);
        CHECK(twice.value == doctest::Approx(2.0 * once.value).epsilon(1e-13));
    }

    SUBCASE("symmetry in the two arguments, shared seed") {
        const GaussianSpectralMeasure measure(Sequence::from_values({1.0, 0.5}));
        const auto u = CylinderFunction::clipped_polynomial(0, {0.1, 1.0}, 8.0);
        const auto v = CylinderFunction::clipped_polynomial(0, {0.0, -0.5, 0.2}, 8.0);
        FormConfig mc = cfg;
        mc.mc_samples = 500;
        mc.seed = 11;
        const FormEstimate uv = form_total(u, v, measure, mc);
        const FormEstimate vu = form_total(v, u, measure, mc);
        CHECK(uv.value == doctest::Approx(vu.value).epsilon(1e-12));
    }

    SUBCASE("unbounded-kernel advisory fires exactly where documented") {
        const GaussianSpectralMeasure measure(Sequence::from_values({1.0}));
        const auto u = CylinderFunction::clipped_polynomial(0, {0.0, 1.0}, 8.0);
        FormConfig warn = cfg;
        warn.mc_samples = 10;
        warn.profile = KernelProfile::fractional;
        warn.alpha = 0.8;
        CHECK(form_total(u, u, measure, warn).unbounded_kernel_warning);
        warn.alpha = 0.4;
        CHECK_FALSE(form_total(u, u, measure, warn).unbounded_kernel_warning);
        warn.profile = KernelProfile::stable;
        warn.alpha = 0.8;
        CHECK_FALSE(form_total(u, u, measure, warn).unbounded_kernel_warning);
    }
}

TEST_CASE("exact discrete form") {
    FormConfig cfg;
    cfg.profile = KernelProfile::stable;
    cfg.alpha = 0.7;

    SUBCASE("two-state closed form") {
        const DiscreteStateSpace space({{0.5}, {-0.5}}, {0.3, 0.7});
        const std::vector<double> u{1.0, 0.0};
        CHECK(discrete_form_exact(u, u, space, cfg) == doctest::Approx(0.42).epsilon(1e-15));
    }

    SUBCASE("constants are in the kernel of the form") {
        const DiscreteStateSpace space({{0.0}, {1.0}, {2.5}}, {0.2, 0.3, 0.5});
        const std::vector<double> c{4.0, 4.0, 4.0};
        const std::vector<double> v{1.0, -1.0, 0.5};
        CHECK(discrete_form_exact(c, v, space, cfg) == 0.0);
    }

    SUBCASE("matches the generator pairing on a three-state space") {
        const DiscreteStateSpace space({{0.0}, {0.9}, {2.0}}, {0.25, 0.35, 0.4});
        const GeneratorMatrix gen = build_generator(space, cfg);
        Rng rng(99);
        for (int trial = 0; trial < 20; ++trial) {
            Eigen::VectorXd u(3), v(3);
            for (int i = 0; i < 3; ++i) {
                u(i) = 2.0 * rng.uniform() - 1.0;
                v(i) = 2.0 * rng.uniform() - 1.0;
            }
            const std::vector<double> us{u(0), u(1), u(2)};
            const std::vector<double> vs{v(0), v(1), v(2)};
            const double form = discrete_form_exact(us, vs, space, cfg);
            CHECK(form == doctest::Approx(weighted_inner(space, gen.a * u, v)).epsilon(1e-12));
        }
    }

    SUBCASE("nonnegative on the diagonal, a thousand random instances") {
        Rng rng(111);
        for (int trial = 0; trial < 1000; ++trial) {
            const long n = 2 + static_cast<long>(rng.below(6));
            std::vector<std::vector<double>> states;
            std::vector<double> mu(static_cast<std::size_t>(n));
            for (long k = 0; k < n; ++k)
                states.push_back({static_cast<double>(k) + 0.4 * rng.uniform()});
            double total = 0.0;
            for (auto& w : mu) {
                w = 0.05 + rng.uniform();
                total += w;
            }
            for (auto& w : mu) w /= total;
            const DiscreteStateSpace space(std::move(states), std::move(mu));
            std::vector<double> u(static_cast<std::size_t>(n));
            for (auto& x : u) x = 4.0 * rng.uniform() - 2.0;
            CHECK(discrete_form_exact(u, u, space, cfg) >= 0.0);
        }
    }

    SUBCASE("coincident states are rejected at construction") {
        CHECK_THROWS_AS(DiscreteStateSpace({{1.0}, {1.0}}, {0.5, 0.5}), std::invalid_argument);
    }
}

TEST_CASE("normal contraction") {
    const NormalContraction phi(0.1);

    SUBCASE("identity on the unit interval") {
        CHECK(phi(0.5) == 0.5);
        CHECK(phi(0.0) == 0.0);
        CHECK(phi(1.0) == 1.0);
    }

    SUBCASE("saturation bounds") {
        CHECK(phi(10.0) <= 1.0 + 0.1);
        CHECK(phi(-10.0) >= -0.1);
        CHECK(phi(10.0) > 1.0);
        CHECK(phi(-10.0) < 0.0);
    }

    SUBCASE("monotone 1-Lipschitz on a sampled grid") {
        for (double eps : {0.01, 0.1, 1.0}) {
            const NormalContraction f(eps);
            double prev_t = -6.0;
            double prev_v = f(prev_t);
            for (int k = 1; k <= 2400; ++k) {
                const double t = -6.0 + 12.0 * k / 2400.0;
                const double v = f(t);
                CHECK(v - prev_v >= -1e-12);
                CHECK(v - prev_v <= (t - prev_t) + 1e-12);
                prev_t = t;
                prev_v = v;
            }
        }
    }

    SUBCASE("composition keeps the form from growing, a thousand instances") {
        Rng rng(222);
        FormConfig cfg;
        cfg.profile = KernelProfile::stable;
        for (int trial = 0; trial < 1000; ++trial) {
            cfg.alpha = 0.3 + 1.4 * rng.uniform();
            const long n = 2 + static_cast<long>(rng.below(5));
            std::vector<std::vector<double>> states;
            std::vector<double> mu(static_cast<std::size_t>(n));
            for (long k = 0; k < n; ++k)
                states.push_back({0.7 * static_cast<double>(k) + 0.3 * rng.uniform()});
            double total = 0.0;
            for (auto& w : mu) {
                w = 0.05 + rng.uniform();
                total += w;
            }
            for (auto& w : mu) w /= total;
            const DiscreteStateSpace space(std::move(states), std::move(mu));

            const double eps = trial % 2 == 0 ? 0.01 : 0.1;
            const NormalContraction f(eps);
            std::vector<double> u(static_cast<std::size_t>(n)), fu(u.size());
            for (std::size_t k = 0; k < u.size(); ++k) {
                u[k] = 4.0 * rng.uniform() - 2.0;
                fu[k] = f(u[k]);
            }
            const double before = discrete_form_exact(u, u, space, cfg);
            const double after = discrete_form_exact(fu, fu, space, cfg);
            CHECK(after <= before * (1.0 + 1e-9) + 1e-15);
        }
    }
}

TEST_CASE("composition with cylinder functions") {
    const NormalContraction phi(0.25);
    const auto u = CylinderFunction::clipped_polynomial(0, {0.0, 2.0}, 5.0);
    const auto cu = contract(u, phi);
    CHECK(cu(std::vector<double>{0.25}) == doctest::Approx(0.5));    // inside [0,1]: identity
    CHECK(cu(std::vector<double>{3.0}) <= 1.25);                     // saturated above
    CHECK(cu(std::vector<double>{-3.0}) >= -0.25);                   // saturated below
    CHECK(cu(std::vector<double>{100.0}) == 0.0);                    // outside the support box
    CHECK(cu.active() == u.active());
}

TEST_CASE("vanishing against constants") {
    FormConfig cfg;
    cfg.profile = KernelProfile::stable;
    cfg.alpha = 0.6;

    SUBCASE("discrete path is exactly zero") {
        Rng rng(333);
        for (int trial = 0; trial < 50; ++trial) {
            const DiscreteStateSpace space({{0.0}, {1.0}, {2.2}}, {0.5, 0.25, 0.25});
            std::vector<double> u{rng.uniform(), rng.uniform(), rng.uniform()};
            CHECK(dirichlet_residual_discrete(u, space, cfg) == 0.0);
        }
    }

    SUBCASE("MC path reports zero with zero standard error") {
        const GaussianSpectralMeasure measure(Sequence::from_values({1.0, 2.0}));
        FormConfig mc = cfg;
        mc.mc_samples = 200;
        mc.seed = 5;
        const auto u = CylinderFunction::bump_product({0, 1}, 1.5);
        const FormEstimate e = dirichlet_test(u, measure, mc);
        CHECK(e.value == 0.0);
        CHECK(e.se == 0.0);
    }

    SUBCASE("contracted functions vanish against constants too") {
        const GaussianSpectralMeasure measure(Sequence::from_values({1.0}));
        FormConfig mc = cfg;
        mc.mc_samples = 100;
        mc.seed = 6;
        const auto u = CylinderFunction::clipped_polynomial(0, {0.2, 1.0}, 4.0);
        const auto cu = contract(u, NormalContraction(0.05));
        const FormEstimate e = dirichlet_test(cu, measure, mc);
        CHECK(e.value == 0.0);
        CHECK(e.se == 0.0);
    }
}

TEST_CASE("exact against forced MC on finite support, a hundred instances") {
    Rng rng(444);
    int nonzero_se = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const double p = 0.2 + 0.6 * rng.uniform();
        const double a = 0.4 + rng.uniform();
        const ProductMeasure measure({AtomsMarginal{{a, -a}, {p, 1.0 - p}}});
        FormConfig cfg;
        cfg.alpha = 0.3 + 1.4 * rng.uniform();
        cfg.profile = trial % 2 == 0 ? KernelProfile::fractional : KernelProfile::stable;
        cfg.seed = 1000 + static_cast<std::uint64_t>(trial);
        cfg.mc_samples = 4000;
        cfg.inner_samples = 4;

        const auto u = CylinderFunction::tabulated({0}, {{a}, {-a}},
                                                   {rng.uniform(), rng.uniform()});
        const FormEstimate exact = form_coordinate(u, u, 0, measure, cfg);
        REQUIRE(exact.exact);

        FormConfig mc = cfg;
        mc.force_mc = true;
        const FormEstimate est = form_coordinate(u, u, 0, measure, mc);
        if (est.se > 0.0) {
            ++nonzero_se;
            CHECK(std::abs(est.value - exact.value) <= 4.0 * est.se);
        } else {
            CHECK(est.value == doctest::Approx(exact.value).epsilon(1e-12));
        }
    }
    CHECK(nonzero_se >= 90);
}

}  // TEST_SUITE
