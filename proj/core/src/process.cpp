#include "nlforms/process.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nlforms/rng.hpp"

namespace nlforms {

int Trajectory::state_at(double t) const {
    if (t < 0.0 || t > horizon) throw std::out_of_range("Trajectory::state_at: t outside [0, T]");
    // Right-continuous: the interval starting at t owns it.
    const auto it = std::upper_bound(jump_times.begin(), jump_times.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - jump_times.begin()) - 1;
    return states[k];
}

Trajectory simulate(const GeneratorMatrix& gen, int x0, double horizon, std::uint64_t seed) {
    const long n = gen.space.size();
    if (x0 < 0 || x0 >= n) throw std::invalid_argument("simulate: x0 outside the state space");
    if (!(horizon > 0.0)) throw std::invalid_argument("simulate: horizon must be > 0");

    Rng rng(seed);
    Trajectory traj;
    traj.horizon = horizon;
    traj.jump_times.push_back(0.0);
    traj.states.push_back(x0);

    int x = x0;
    double t = 0.0;
    std::vector<double> weights(static_cast<std::size_t>(n));
    while (true) {
        const double rate = gen.a(x, x);
        if (!(rate > 1e-300)) break;  // absorbing state, no further jumps
        t += rng.exponential(rate);
        if (t >= horizon) break;
        for (long y = 0; y < n; ++y)
            weights[static_cast<std::size_t>(y)] = y == x ? 0.0 : std::max(0.0, -gen.a(x, y));
        x = rng.categorical(weights);
        traj.jump_times.push_back(t);
        traj.states.push_back(x);
    }
    return traj;
}

std::vector<double> occupation_measure(const Trajectory& traj, long n_states) {
    std::vector<double> occ(static_cast<std::size_t>(n_states), 0.0);
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const double t0 = traj.jump_times[k];
        const double t1 = k + 1 < traj.jump_times.size() ? traj.jump_times[k + 1] : traj.horizon;
        const int s = traj.states[k];
        if (s < 0 || s >= n_states)
            throw std::invalid_argument("occupation_measure: state index outside range");
        occ[static_cast<std::size_t>(s)] += t1 - t0;
    }
    for (double& v : occ) v /= traj.horizon;
    return occ;
}

InvarianceCheck empirical_invariance(const Trajectory& traj, std::span<const double> mu) {
    InvarianceCheck out;
    out.jumps = traj.jumps();
    out.conclusive = out.jumps >= 100 || mu.size() == 1;
    const auto occ = occupation_measure(traj, static_cast<long>(mu.size()));
    double tv = 0.0;
    for (std::size_t s = 0; s < mu.size(); ++s) tv += std::abs(occ[s] - mu[s]);
    out.tv_distance = 0.5 * tv;
    return out;
}

FieldTrajectory reconstruct_field(const Trajectory& traj, const DiscreteStateSpace& space,
                                  const EigenSequence& eig, int level) {
    if (space.states.front().size() != static_cast<std::size_t>(eig.size()))
        throw std::invalid_argument("reconstruct_field: state arity != eigenvalue count");

    const WeightedSpaceSpec image = tau_space(eig, level);
    FieldTrajectory out;
    out.level = level;
    out.snapshots.reserve(traj.states.size());
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        FieldSnapshot snap;
        snap.t_begin = traj.jump_times[k];
        snap.t_end = k + 1 < traj.jump_times.size() ? traj.jump_times[k + 1] : traj.horizon;
        snap.coeffs = space.states[static_cast<std::size_t>(traj.states[k])];
        snap.norm = weighted_norm(snap.coeffs, image);
        out.snapshots.push_back(std::move(snap));
    }
    return out;
}

}  // namespace nlforms
