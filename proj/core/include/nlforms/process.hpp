#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nlforms/generators.hpp"
#include "nlforms/spaces.hpp"

namespace nlforms {

/// Piecewise-constant right-continuous path: states[k] holds on
/// [jump_times[k], jump_times[k+1]) and the last interval runs to horizon.
struct Trajectory {
    std::vector<double> jump_times;  // strictly increasing, starts at 0
    std::vector<int> states;         // state index per interval
    double horizon = 0.0;

    long jumps() const { return static_cast<long>(jump_times.size()) - 1; }
    int state_at(double t) const;
};

/// Exact jump-chain simulation of the conservative Markov process generated
/// by A: holding rate at x is the diagonal A(x,x), jump weights off a state
/// are proportional to -A(x,y). States with zero rate absorb. Deterministic
/// given the seed.
Trajectory simulate(const GeneratorMatrix& gen, int x0, double horizon, std::uint64_t seed);

/// Time-occupation fractions per state.
std::vector<double> occupation_measure(const Trajectory& traj, long n_states);

struct InvarianceCheck {
    double tv_distance = 0.0;
    long jumps = 0;
    bool conclusive = false;  // requires >= 100 observed jumps
};

/// Total-variation distance between the occupation measure and mu.
InvarianceCheck empirical_invariance(const Trajectory& traj, std::span<const double> mu);

/// One interval of a coefficient-valued path with its reconstruction norm.
struct FieldSnapshot {
    double t_begin = 0.0;
    double t_end = 0.0;
    std::vector<double> coeffs;
    double norm = 0.0;
};

struct FieldTrajectory {
    int level = 0;
    std::vector<FieldSnapshot> snapshots;
};

/// Reads the trajectory through the coordinate points of its state space and
/// reports the function-space norm per interval: the image of each state
/// under the level-m identification, whose norm is the weighted l2 norm with
/// beta_i = lambda_i^(-2m).
FieldTrajectory reconstruct_field(const Trajectory& traj, const DiscreteStateSpace& space,
                                  const EigenSequence& eig, int level);

}  // namespace nlforms
