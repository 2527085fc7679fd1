#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "stitchsmc/core/errors.hpp"
#include "stitchsmc/core/model.hpp"
#include "stitchsmc/core/parallel.hpp"
#include "stitchsmc/core/resample.hpp"
#include "stitchsmc/core/rng.hpp"
#include "stitchsmc/core/weighted_sample.hpp"

namespace stitchsmc {

struct FilterOptions {
    // Resample when ESS < ess_threshold * N. 0 disables adaptive resampling;
    // values above 1 force a resample at every opportunity.
    double ess_threshold = 0.5;
    int threads = 1;
    long time_index = -1;  // carried into error diagnostics only
};

namespace detail {

// One propagate-and-weight sweep. Extends every trajectory by a proposed
// state and replaces the sample's weights with the reweighted posterior.
// Per-particle RNG substreams keyed off a single draw from `rng`, so the
// result is independent of the thread count.
template <StateSpaceModel M>
void propagate_and_weight(const M& model, TrajectorySample<typename M::State>& sample,
                          const typename M::Observation& y, const FilterOptions& opt,
                          RngStream& rng) {
    const std::size_t n = sample.size();
    sample.ensure_explicit_weights();
    const std::uint64_t key = rng.next_u64();
    std::vector<double> new_lw(n);
    parallel_for(n, opt.threads, [&](std::size_t i) {
        RngStream sub(key, static_cast<std::uint64_t>(i));
        auto& traj = sample.trajectories[i];
        auto [state, log_q] = propose_with_log_density(model, traj.back(), y, sub);
        double incr = model.transition_log_density(traj.back(), state) +
                      model.observation_log_density(state, y) - log_q;
        new_lw[i] = sample.log_weights[i] + incr;
        traj.push_back(std::move(state));
    });
    normalise_log_weights(new_lw, opt.time_index);
    sample.log_weights = std::move(new_lw);
}

template <typename State>
void resample_trajectories(TrajectorySample<State>& sample, RngStream& rng) {
    auto idx = multinomial_indices(sample.log_weights, sample.size(), rng);
    std::vector<std::vector<State>> out;
    out.reserve(sample.size());
    for (std::size_t i : idx) out.push_back(sample.trajectories[i]);
    sample.trajectories = std::move(out);
    sample.log_weights = uniform_log_weights(sample.size());
}

}  // namespace detail

// Fresh particle set conditioned on the first observation. Uniform weights by
// the initial_sample contract.
template <StateSpaceModel M>
WeightedSample<typename M::State> pf_init(const M& model, const typename M::Observation& y0,
                                          std::size_t n, RngStream& rng, int threads = 1) {
    WeightedSample<typename M::State> out;
    out.particles.resize(n);
    out.log_weights = uniform_log_weights(n);
    const std::uint64_t key = rng.next_u64();
    parallel_for(n, threads, [&](std::size_t i) {
        RngStream sub(key, static_cast<std::uint64_t>(i));
        out.particles[i] = model.initial_sample(y0, sub);
    });
    return out;
}

template <StateSpaceModel M>
TrajectorySample<typename M::State> pf_init_trajectories(const M& model,
                                                         const typename M::Observation& y0,
                                                         std::size_t n, RngStream& rng,
                                                         int threads = 1) {
    auto marginal = pf_init(model, y0, n, rng, threads);
    TrajectorySample<typename M::State> out;
    out.trajectories.reserve(n);
    for (auto& p : marginal.particles) out.trajectories.push_back({std::move(p)});
    out.log_weights = std::move(marginal.log_weights);
    return out;
}

// Classical particle filter update on a marginal sample: adaptive multinomial
// resample on the incoming weights, propagate through the proposal, reweight.
template <StateSpaceModel M>
void filter_update(const M& model, WeightedSample<typename M::State>& sample,
                   const typename M::Observation& y, const FilterOptions& opt, RngStream& rng) {
    const std::size_t n = sample.size();
    if (ess(sample.log_weights) < opt.ess_threshold * static_cast<double>(n))
        sample = multinomial_resample(sample, rng);
    const std::uint64_t key = rng.next_u64();
    std::vector<double> new_lw(n);
    std::vector<typename M::State> next(n);
    parallel_for(n, opt.threads, [&](std::size_t i) {
        RngStream sub(key, static_cast<std::uint64_t>(i));
        auto [state, log_q] = propose_with_log_density(model, sample.particles[i], y, sub);
        double incr = model.transition_log_density(sample.particles[i], state) +
                      model.observation_log_density(state, y) - log_q;
        new_lw[i] = sample.log_weights[i] + incr;
        next[i] = std::move(state);
    });
    normalise_log_weights(new_lw, opt.time_index);
    sample.particles = std::move(next);
    sample.log_weights = std::move(new_lw);
}

// Same update on full trajectories (the whole path is resampled together).
template <StateSpaceModel M>
void pf_update(const M& model, TrajectorySample<typename M::State>& sample,
               const typename M::Observation& y, const FilterOptions& opt, RngStream& rng) {
    sample.ensure_explicit_weights();
    if (ess(sample.log_weights) < opt.ess_threshold * static_cast<double>(sample.size()))
        detail::resample_trajectories(sample, rng);
    detail::propagate_and_weight(model, sample, y, opt, rng);
}

// Fixed-lag variant of the trajectory filter: the resample step runs after
// propagation and only redraws the final lag+1 coordinates, splicing the
// redrawn tails onto the untouched heads position by position. Marginals of
// recent coordinates stay correct; the joint across the splice point does
// not. While the trajectory is no longer than the lag window the update is
// pf_update with a compulsory full resample (nothing is frozen yet).
template <StateSpaceModel M>
void marginal_fixed_lag_update(const M& model, TrajectorySample<typename M::State>& sample,
                               const typename M::Observation& y, int lag,
                               const FilterOptions& opt, RngStream& rng) {
    using State = typename M::State;
    detail::propagate_and_weight(model, sample, y, opt, rng);
    const std::size_t t = sample.length() - 1;  // time index just produced
    if (t <= static_cast<std::size_t>(lag)) {
        detail::resample_trajectories(sample, rng);
        return;
    }
    const std::size_t n = sample.size();
    if (!(ess(sample.log_weights) < opt.ess_threshold * static_cast<double>(n))) return;
    const std::size_t cut = t - static_cast<std::size_t>(lag);  // first resampled coordinate
    auto idx = multinomial_indices(sample.log_weights, n, rng);
    std::vector<std::vector<State>> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<State> traj(sample.trajectories[i].begin(),
                                sample.trajectories[i].begin() + static_cast<long>(cut));
        const auto& donor = sample.trajectories[idx[i]];
        traj.insert(traj.end(), donor.begin() + static_cast<long>(cut), donor.end());
        out.push_back(std::move(traj));
    }
    sample.trajectories = std::move(out);
    sample.log_weights = uniform_log_weights(n);
}

}  // namespace stitchsmc
