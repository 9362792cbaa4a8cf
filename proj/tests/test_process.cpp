#include <doctest.h>

#include <cmath>
#include <vector>

#include "nlforms/process.hpp"

using namespace nlforms;

namespace {

GeneratorMatrix toy_generator(double p) {
    FormConfig cfg;
    cfg.profile = KernelProfile::stable;
    const DiscreteStateSpace space({{0.5}, {-0.5}}, {p, 1.0 - p});
    return build_generator(space, cfg);
}

}  // namespace

TEST_SUITE("process") {

TEST_CASE("single absorbing state never jumps") {
    FormConfig cfg;
    const DiscreteStateSpace space({{1.0}}, {1.0});
    const GeneratorMatrix gen = build_generator(space, cfg);
    const Trajectory traj = simulate(gen, 0, 50.0, 9);
    CHECK(traj.jumps() == 0);
    CHECK(traj.state_at(0.0) == 0);
    CHECK(traj.state_at(49.9) == 0);

    const std::vector<double> mu{1.0};
    const InvarianceCheck inv = empirical_invariance(traj, mu);
    CHECK(inv.tv_distance == 0.0);
    CHECK(inv.conclusive);
}

TEST_CASE("trajectory bookkeeping") {
    Trajectory traj;
    traj.horizon = 10.0;
    traj.jump_times = {0.0, 2.0, 5.0};
    traj.states = {1, 0, 1};

    SUBCASE("right-continuous evaluation") {
        CHECK(traj.state_at(0.0) == 1);
        CHECK(traj.state_at(2.0) == 0);            // the jump instant belongs to the new state
        CHECK(traj.state_at(2.0 - 1e-12) == 1);
        CHECK(traj.state_at(5.0) == 1);
        CHECK(traj.state_at(10.0) == 1);
        CHECK_THROWS_AS(traj.state_at(-0.1), std::out_of_range);
        CHECK_THROWS_AS(traj.state_at(10.1), std::out_of_range);
    }

    SUBCASE("occupation fractions") {
        const auto occ = occupation_measure(traj, 2);
        CHECK(occ[0] == doctest::Approx(0.3));
        CHECK(occ[1] == doctest::Approx(0.7));
    }
}

TEST_CASE("seed determinism is bit-for-bit") {
    const GeneratorMatrix gen = toy_generator(0.3);
    const Trajectory a = simulate(gen, 0, 500.0, 1234);
    const Trajectory b = simulate(gen, 0, 500.0, 1234);
    REQUIRE(a.jump_times.size() == b.jump_times.size());
    for (std::size_t k = 0; k < a.jump_times.size(); ++k) {
        CHECK(a.jump_times[k] == b.jump_times[k]);
        CHECK(a.states[k] == b.states[k]);
    }
    const Trajectory c = simulate(gen, 0, 500.0, 1235);
    CHECK(a.jump_times.size() != c.jump_times.size());
}

TEST_CASE("occupation tracks the stationary vector") {
    const GeneratorMatrix gen = toy_generator(0.5);
    const Trajectory traj = simulate(gen, 0, 1000.0, 21);
    const std::vector<double> mu{0.5, 0.5};
    const InvarianceCheck inv = empirical_invariance(traj, mu);
    CHECK(inv.conclusive);
    CHECK(inv.tv_distance <= 0.05);
}

TEST_CASE("jump rate out of the plus state") {
    // Holding rate at state 0 is the diagonal 2(1-p) = 1.4.
    const double p = 0.3;
    const GeneratorMatrix gen = toy_generator(p);
    const Trajectory traj = simulate(gen, 0, 10000.0, 31);

    long jumps_from_plus = 0;
    double time_in_plus = 0.0;
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const double t1 =
            k + 1 < traj.jump_times.size() ? traj.jump_times[k + 1] : traj.horizon;
        if (traj.states[k] == 0) {
            time_in_plus += t1 - traj.jump_times[k];
            if (k + 1 < traj.jump_times.size()) ++jumps_from_plus;
        }
    }
    const double rate_hat = static_cast<double>(jumps_from_plus) / time_in_plus;
    const double se = std::sqrt(static_cast<double>(jumps_from_plus)) / time_in_plus;
    CHECK(std::abs(rate_hat - 1.4) <= 3.0 * se);
}

TEST_CASE("swapped stationary vector shows the expected gap") {
    const double p = 0.3;
    const GeneratorMatrix gen = toy_generator(p);
    const Trajectory traj = simulate(gen, 0, 10000.0, 41);
    const std::vector<double> swapped{1.0 - p, p};
    const InvarianceCheck inv = empirical_invariance(traj, swapped);
    CHECK(std::abs(inv.tv_distance - 0.4) <= 0.02);
}

TEST_CASE("short runs are flagged inconclusive") {
    const GeneratorMatrix gen = toy_generator(0.5);
    const Trajectory traj = simulate(gen, 0, 1.0, 3);
    const std::vector<double> mu{0.5, 0.5};
    CHECK_FALSE(empirical_invariance(traj, mu).conclusive);
}

TEST_CASE("lag transitions follow the semigroup") {
    const double p = 0.3;
    const GeneratorMatrix gen = toy_generator(p);
    const Eigen::MatrixXd m1 = semigroup(gen, 1.0);
    const Trajectory traj = simulate(gen, 0, 10001.0, 51);

    long count[2][2] = {{0, 0}, {0, 0}};
    const long segments = 10000;
    for (long s = 0; s < segments; ++s) {
        const int from = traj.state_at(static_cast<double>(s));
        const int to = traj.state_at(static_cast<double>(s) + 1.0);
        ++count[from][to];
    }
    for (int from = 0; from < 2; ++from) {
        const long row = count[from][0] + count[from][1];
        REQUIRE(row > 100);
        for (int to = 0; to < 2; ++to) {
            const double p_hat = static_cast<double>(count[from][to]) / row;
            const double se = std::sqrt(m1(from, to) * (1.0 - m1(from, to)) / row);
            CHECK(std::abs(p_hat - m1(from, to)) <= 4.0 * se);
        }
    }
}

TEST_CASE("field reconstruction") {
    SUBCASE("one active coordinate weights by the eigenvalue power") {
        FormConfig cfg;
        const DiscreteStateSpace space({{0.4}, {1.2}}, {0.5, 0.5});
        const GeneratorMatrix gen = build_generator(space, cfg);
        const Trajectory traj = simulate(gen, 0, 20.0, 61);
        const EigenSequence eig(Sequence::from_values({0.5}));
        const int level = -2;
        const FieldTrajectory field = reconstruct_field(traj, space, eig, level);
        REQUIRE(field.snapshots.size() == traj.states.size());
        for (std::size_t k = 0; k < field.snapshots.size(); ++k) {
            const double x = space.states[static_cast<std::size_t>(traj.states[k])][0];
            // beta = lambda^(-2m) = 0.5^4, norm = sqrt(beta) |x|.
            CHECK(field.snapshots[k].norm ==
                  doctest::Approx(std::sqrt(std::pow(0.5, 4.0)) * std::abs(x)).epsilon(1e-14));
        }
    }

    SUBCASE("the two norm routes agree to 1e-12") {
        FormConfig cfg;
        const DiscreteStateSpace space({{0.3, -0.7, 0.1}, {1.0, 0.2, -0.4}}, {0.6, 0.4});
        const GeneratorMatrix gen = build_generator(space, cfg);
        const Trajectory traj = simulate(gen, 0, 30.0, 71);
        const EigenSequence eig(Sequence::from_values({0.9, 0.5, 0.2}));
        for (int level : {-2, -1, 0, 1, 2}) {
            const FieldTrajectory field = reconstruct_field(traj, space, eig, level);
            for (const auto& snap : field.snapshots) {
                const SpectralVector back = tau_inverse(snap.coeffs, eig, level);
                CHECK(std::abs(snap.norm - level_norm(back)) <= 1e-12);
            }
        }
    }

    SUBCASE("constant trajectory keeps a constant norm") {
        FormConfig cfg;
        const DiscreteStateSpace space({{0.8, 0.1}}, {1.0});
        const GeneratorMatrix gen = build_generator(space, cfg);
        const Trajectory traj = simulate(gen, 0, 5.0, 81);
        const EigenSequence eig(Sequence::from_values({1.0, 0.5}));
        const FieldTrajectory field = reconstruct_field(traj, space, eig, 1);
        REQUIRE(field.snapshots.size() == 1);
        CHECK(field.snapshots.front().t_begin == 0.0);
        CHECK(field.snapshots.front().t_end == 5.0);
    }

    SUBCASE("dimension mismatch is rejected") {
        FormConfig cfg;
        const DiscreteStateSpace space({{0.3, 0.1}, {0.9, -0.2}}, {0.5, 0.5});
        const GeneratorMatrix gen = build_generator(space, cfg);
        const Trajectory traj = simulate(gen, 0, 5.0, 91);
        const EigenSequence eig(Sequence::from_values({1.0}));
        CHECK_THROWS_AS(reconstruct_field(traj, space, eig, 0), std::invalid_argument);
    }
}

}  // TEST_SUITE
