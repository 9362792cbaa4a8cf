#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "nlforms/rng.hpp"
#include "nlforms/spaces.hpp"

using namespace nlforms;

namespace {

std::vector<double> random_point(Rng& rng, long n, double scale = 1.0) {
    std::vector<double> x(static_cast<std::size_t>(n));
    for (auto& v : x) v = scale * (2.0 * rng.uniform() - 1.0);
    return x;
}

}  // namespace

TEST_SUITE("spaces") {

TEST_CASE("weighted norm examples") {
    const auto space = WeightedSpaceSpec::lp(2.0, Sequence::from_values({4.0, 1.0, 1.0}));
    CHECK(weighted_norm(std::vector<double>{0.0, 0.0, 0.0}, space) == 0.0);
    CHECK(weighted_norm(std::vector<double>{1.0, 0.0, 0.0}, space) == doctest::Approx(2.0));

    const auto sup_space = WeightedSpaceSpec::linf(Sequence::from_values({1.0, 1.0}));
    CHECK(weighted_norm(std::vector<double>{1.0, 1.0}, sup_space) == doctest::Approx(1.0));

    CHECK_THROWS_AS(weighted_norm(std::vector<double>{1.0}, space), std::invalid_argument);
    CHECK_THROWS_AS(WeightedSpaceSpec::lp(std::numeric_limits<double>::infinity(),
                                          Sequence::from_values({1.0})),
                    std::invalid_argument);
}

TEST_CASE("weighted norm agrees with direct summation on random instances") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const long n = 1 + static_cast<long>(rng.below(6));
        std::vector<double> beta(static_cast<std::size_t>(n));
        for (auto& b : beta) b = 0.1 + rng.uniform();
        const double p = 1.0 + 2.0 * rng.uniform();
        const auto space = WeightedSpaceSpec::lp(p, Sequence::from_values(beta));
        const auto x = random_point(rng, n);

        double acc = 0.0;
        for (long i = 0; i < n; ++i)
            acc += beta[static_cast<std::size_t>(i)] *
                   std::pow(std::abs(x[static_cast<std::size_t>(i)]), p);
        CHECK(weighted_norm(x, space) == doctest::Approx(std::pow(acc, 1.0 / p)).epsilon(1e-12));
    }
}

TEST_CASE("norm axioms on random pairs") {
    Rng rng(22);
    for (int trial = 0; trial < 200; ++trial) {
        const long n = 2 + static_cast<long>(rng.below(5));
        std::vector<double> beta(static_cast<std::size_t>(n));
        for (auto& b : beta) b = 0.1 + rng.uniform();
        const bool sup = rng.uniform() < 0.3;
        const auto space = sup ? WeightedSpaceSpec::linf(Sequence::from_values(beta))
                               : WeightedSpaceSpec::lp(1.0 + 2.0 * rng.uniform(),
                                                       Sequence::from_values(beta));

        const auto x = random_point(rng, n);
        const auto y = random_point(rng, n);
        const double c = 4.0 * rng.uniform() - 2.0;

        std::vector<double> cx(x), xpy(x);
        for (long i = 0; i < n; ++i) {
            cx[static_cast<std::size_t>(i)] *= c;
            xpy[static_cast<std::size_t>(i)] += y[static_cast<std::size_t>(i)];
        }

        const double nx = weighted_norm(x, space);
        CHECK(weighted_norm(cx, space) == doctest::Approx(std::abs(c) * nx).epsilon(1e-12));
        CHECK(weighted_norm(xpy, space) <= nx + weighted_norm(y, space) + 1e-12);

        const std::vector<double> zero(static_cast<std::size_t>(n), 0.0);
        CHECK(weighted_norm(zero, space) == 0.0);
        if (nx == 0.0) {
            for (double v : x) CHECK(v == 0.0);
        }
    }
}

TEST_CASE("product metric matches its defining series") {
    const auto space = WeightedSpaceSpec::product(3);
    const std::vector<double> x{1.0, 2.0, 3.0};
    const std::vector<double> y{0.0, 0.0, 0.0};
    // Hand evaluation of the truncated series.
    double expected = 0.0;
    double partial = 0.0;
    for (int k = 1; k <= 3; ++k) {
        partial += x[static_cast<std::size_t>(k - 1)] * x[static_cast<std::size_t>(k - 1)];
        const double nk = std::sqrt(partial);
        expected += std::pow(0.5, k) * nk / (1.0 + nk);
    }
    CHECK(product_metric(x, y, space) == doctest::Approx(expected).epsilon(1e-15));
    CHECK(product_metric(x, x, space) == 0.0);
}

TEST_CASE("spectral identification round trip and isometry") {
    SUBCASE("identity case") {
        const EigenSequence eig(Sequence::from_values({0.9, 0.5}));
        const SpectralVector f{{1.0, 0.0}, 3};
        const auto x = tau_map(f, eig);
        const auto back = tau_inverse(x, eig, 3);
        CHECK(back.coeffs[0] == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(back.coeffs[1] == doctest::Approx(0.0));
    }

    SUBCASE("two-way norm computation at level -2") {
        // Direct evaluation: image x_i = lambda_i^m a_i, weights lambda_i^(-2m);
        // the weighted sum telescopes to sum a_i^2.
        const EigenSequence eig(Sequence::from_values({0.5, 0.25}));
        const SpectralVector f{{1.0, 1.0}, -2};
        const auto x = tau_map(f, eig);
        CHECK(x[0] == doctest::Approx(std::pow(0.5, -2) * 1.0));
        CHECK(x[1] == doctest::Approx(std::pow(0.25, -2) * 1.0));
        const auto space = tau_space(eig, -2);
        double direct = 0.0;
        for (int i = 0; i < 2; ++i) {
            const double beta = std::pow(eig.at(i + 1), 4.0);
            direct += beta * x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
        }
        CHECK(weighted_norm(x, space) == doctest::Approx(std::sqrt(direct)).epsilon(1e-14));
        CHECK(weighted_norm(x, space) == doctest::Approx(level_norm(f)).epsilon(1e-14));
    }

    SUBCASE("harmonic eigenvalues at level 1 give quadratic weights") {
        const EigenSequence eig = EigenSequence::power(1.0, 8);
        const auto space = tau_space(eig, 1);
        for (long i = 1; i <= 8; ++i)
            CHECK(space.weights().at(i) ==
                  doctest::Approx(static_cast<double>(i * i)).epsilon(1e-12));
    }

    SUBCASE("random round trips stay within 1e-12") {
        Rng rng(33);
        for (int trial = 0; trial < 200; ++trial) {
            const long n = 1 + static_cast<long>(rng.below(12));
            std::vector<double> lambda(static_cast<std::size_t>(n));
            double prev = 1.0;
            for (auto& l : lambda) {
                prev *= 0.4 + 0.6 * rng.uniform();
                l = std::max(prev, 0.05);
                prev = l;
            }
            const EigenSequence eig(Sequence::from_values(lambda));
            const int level = static_cast<int>(rng.below(7)) - 3;
            SpectralVector f;
            f.level = level;
            f.coeffs = random_point(rng, n);

            const auto x = tau_map(f, eig);
            const auto back = tau_inverse(x, eig, level);
            for (long i = 0; i < n; ++i)
                CHECK(back.coeffs[static_cast<std::size_t>(i)] ==
                      doctest::Approx(f.coeffs[static_cast<std::size_t>(i)]).epsilon(1e-12));
            CHECK(std::abs(weighted_norm(x, tau_space(eig, level)) - level_norm(f)) <=
                  1e-12 * std::max(1.0, level_norm(f)));
        }
    }
}

TEST_CASE("plateau bump meets its constraints") {
    CHECK(plateau_bump(0.0) == 1.0);
    CHECK(plateau_bump(1.0) == 1.0);
    CHECK(plateau_bump(-0.7) == 1.0);
    CHECK(plateau_bump(3.0) == 0.0);
    CHECK(plateau_bump(-5.0) == 0.0);
    // 0 <= eta <= 1, |eta'| <= 1 by central differences on a fine grid.
    const double h = 1e-6;
    for (int k = 0; k <= 4000; ++k) {
        const double x = -4.0 + 8.0 * k / 4000.0;
        const double v = plateau_bump(x);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        const double slope = (plateau_bump(x + h) - plateau_bump(x - h)) / (2.0 * h);
        CHECK(std::abs(slope) <= plateau_bump_slope_bound() + 1e-6);
    }
}

TEST_CASE("nest membership") {
    const long n = 6;
    const auto space =
        WeightedSpaceSpec::lp(2.0, Sequence::from_power_law(PowerLaw{1.0, 0.0}, n));

    SUBCASE("zero vector is in every nest member") {
        const std::vector<double> zero(static_cast<std::size_t>(n), 0.0);
        for (long m = 1; m <= 5; ++m) CHECK(nest_contains(zero, m, space));
    }

    SUBCASE("coordinate-wise boundary case") {
        // beta = 1, p = 2, delta = 1: threshold is M * i^-1; x_i = i^-1 sits
        // exactly on it for M = 1.
        std::vector<double> x(static_cast<std::size_t>(n));
        for (long i = 1; i <= n; ++i)
            x[static_cast<std::size_t>(i - 1)] = 1.0 / static_cast<double>(i);
        CHECK(nest_contains(x, 1, space, 1.0));
        x[0] = 2.0;
        CHECK_FALSE(nest_contains(x, 1, space, 1.0));
    }

    SUBCASE("monotone in M") {
        Rng rng(44);
        for (int trial = 0; trial < 100; ++trial) {
            const auto x = random_point(rng, n, 2.0);
            for (long m = 1; m < 20; ++m) {
                if (nest_contains(x, m, space)) {
                    for (long mp = m; mp <= 20; ++mp) CHECK(nest_contains(x, mp, space));
                    break;
                }
            }
        }
    }
}

TEST_CASE("localization") {
    const long n = 4;
    const auto space =
        WeightedSpaceSpec::lp(2.0, Sequence::from_power_law(PowerLaw{1.0, 0.0}, n));
    const auto f = CylinderFunction::constant(1.0);

    SUBCASE("equals f deep inside the nest and vanishes outside the triple") {
        const auto f_m = localize(f, 2, space);
        const std::vector<double> deep{0.1, 0.05, 0.01, 0.0};
        REQUIRE(nest_contains(deep, 2, space));
        CHECK(f_m(deep) == doctest::Approx(1.0).epsilon(1e-15));

        // Push one scaled coordinate past the 3M threshold: cutoff kills it.
        std::vector<double> outside{0.0, 0.0, 0.0, 0.0};
        outside[0] = 3.0 * 2.0 / 1.0 + 0.1;  // scale_1 = 1/M
        CHECK(f_m(outside) == 0.0);
    }

    SUBCASE("midzone damping never amplifies") {
        Rng rng(55);
        const auto g = CylinderFunction::bump_product({0, 1}, 5.0);
        const auto g_m = localize(g, 1, space);
        for (int trial = 0; trial < 300; ++trial) {
            const auto x = random_point(rng, n, 6.0);
            CHECK(std::abs(g_m(x)) <= std::abs(g(x)) + 1e-15);
        }
    }

    SUBCASE("plateau idempotence over a sampled grid of nest points") {
        const auto g = CylinderFunction::clipped_polynomial(1, {0.5, 1.0, -0.25}, 50.0);
        const auto g_m = localize(g, 3, space);
        Rng rng(66);
        int found = 0;
        for (int trial = 0; trial < 2000 && found < 200; ++trial) {
            const auto x = random_point(rng, n, 1.4);
            if (!nest_contains(x, 3, space)) continue;
            ++found;
            CHECK(g_m(x) == doctest::Approx(g(x)).epsilon(1e-12));
        }
        REQUIRE(found >= 100);
    }

    SUBCASE("localized functions honor their Lipschitz budget") {
        Rng rng(77);
        const auto g = CylinderFunction::bump_product({0, 1, 2, 3}, 2.0);
        const auto g_m = localize(g, 2, space);
        for (int trial = 0; trial < 300; ++trial) {
            const auto a = random_point(rng, n, 4.0);
            const auto b = random_point(rng, n, 4.0);
            double dist = 0.0;
            for (long i = 0; i < n; ++i) {
                const double d = a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(i)];
                dist += d * d;
            }
            dist = std::sqrt(dist);
            CHECK(std::abs(g_m(a) - g_m(b)) <= g_m.lipschitz() * dist + 1e-12);
        }
    }
}

TEST_CASE("cesaro means") {
    SUBCASE("constant sequence is fixed") {
        const std::vector<std::vector<double>> seq(5, {1.5, -2.0});
        const auto mean = cesaro_mean(seq, 5);
        CHECK(mean[0] == doctest::Approx(1.5));
        CHECK(mean[1] == doctest::Approx(-2.0));
    }

    SUBCASE("two-term arithmetic mean") {
        const std::vector<std::vector<double>> seq{{0.0}, {2.0}};
        CHECK(cesaro_mean(seq, 2)[0] == doctest::Approx(1.0));
    }

    SUBCASE("errors") {
        CHECK_THROWS_AS(cesaro_mean(std::vector<std::vector<double>>{}, 1),
                        std::invalid_argument);
        CHECK_THROWS_AS(cesaro_mean(std::vector<std::vector<double>>{{1.0}}, 2),
                        std::invalid_argument);
    }

    SUBCASE("means of growing localizations converge pointwise to f") {
        const long n = 3;
        const auto space =
            WeightedSpaceSpec::lp(2.0, Sequence::from_power_law(PowerLaw{1.0, 0.0}, n));
        const auto f = CylinderFunction::clipped_polynomial(0, {0.0, 1.0}, 100.0);

        std::vector<CylinderFunction> locs;
        for (long l = 0; l < 8; ++l) locs.push_back(localize(f, 1L << l, space));

        const std::vector<double> x{0.8, -0.6, 0.4};
        const double target = f(x);
        double prev_err = std::abs(cesaro_mean(locs, 1)(x) - target);
        const double last_err = std::abs(cesaro_mean(locs, 8)(x) - target);
        CHECK(last_err < prev_err + 1e-12);
        CHECK(last_err <= 0.2 * std::abs(target) + 1e-12);
        // The tail terms are exact once 2^l exceeds the point scale.
        CHECK(locs.back()(x) == doctest::Approx(target).epsilon(1e-12));
    }
}

}  // TEST_SUITE
