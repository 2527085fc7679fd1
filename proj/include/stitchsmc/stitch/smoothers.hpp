#pragma once

#include <cstddef>
#include <deque>
#include <utility>
#include <vector>

#include "stitchsmc/core/particle_filter.hpp"
#include "stitchsmc/stitch/backward_sim.hpp"
#include "stitchsmc/stitch/stitching.hpp"

namespace stitchsmc {

namespace detail {

// Startup regime shared by the online smoothers while the trajectory is not
// yet longer than the lag window: plain filter update with a compulsory full
// resample, so the sample leaves every update unweighted.
template <StateSpaceModel M>
void smoother_startup_update(const M& model, TrajectorySample<typename M::State>& sample,
                             const typename M::Observation& y, const FilterOptions& opt,
                             RngStream& rng) {
    propagate_and_weight(model, sample, y, opt, rng);
    resample_trajectories(sample, rng);
    sample.log_weights.clear();
}

template <typename State>
std::vector<std::vector<State>> take_heads(const std::vector<std::vector<State>>& trajectories,
                                           std::size_t cut) {
    std::vector<std::vector<State>> heads;
    heads.reserve(trajectories.size());
    for (const auto& traj : trajectories)
        heads.emplace_back(traj.begin(), traj.begin() + static_cast<long>(cut) + 1);
    return heads;
}

// Snapshot of the trajectories' newest coordinates as a weighted marginal.
template <typename State>
WeightedSample<State> end_column_marginal(const TrajectorySample<State>& sample) {
    WeightedSample<State> marginal;
    marginal.particles.reserve(sample.size());
    for (const auto& traj : sample.trajectories) marginal.particles.push_back(traj.back());
    marginal.log_weights =
        sample.uniform() ? uniform_log_weights(sample.size()) : sample.log_weights;
    return marginal;
}

}  // namespace detail

// Online fixed-lag smoother carrying unweighted trajectory particles. After
// absorbing the observation at time T, `trajectories` approximates the
// fixed-lag trajectory law built from lag-windowed conditionals.
template <typename State>
struct SmootherState {
    TrajectorySample<State> trajectories;
    long time = 0;
};

template <StateSpaceModel M>
SmootherState<typename M::State> online_smoother_init(const M& model,
                                                      const typename M::Observation& y0,
                                                      std::size_t n, RngStream& rng,
                                                      int threads = 1) {
    SmootherState<typename M::State> state;
    state.trajectories = pf_init_trajectories(model, y0, n, rng, threads);
    state.trajectories.log_weights.clear();
    state.time = 0;
    return state;
}

// One observation: propagate and weight every trajectory, slice off the last
// lag+2 coordinates as candidate tails, and stitch each untouched head to a
// tail drawn by stitch weight. The previous block's coordinates beyond the
// overlap are replaced wholesale, so edge effects at the join are resolved
// under the new observation window.
template <StateSpaceModel M>
void online_smoother_update(const M& model, SmootherState<typename M::State>& state,
                            const typename M::Observation& y, int lag, int max_rejections,
                            const FilterOptions& opt, RngStream& rng) {
    using State = typename M::State;
    FilterOptions local = opt;
    local.time_index = ++state.time;
    auto& sample = state.trajectories;
    if (state.time <= lag) {
        detail::smoother_startup_update(model, sample, y, local, rng);
        return;
    }
    const std::size_t cut = static_cast<std::size_t>(state.time - lag - 1);
    auto heads = detail::take_heads(sample.trajectories, cut);
    detail::propagate_and_weight(model, sample, y, local, rng);
    StitchBlock<State> block;
    block.tails.reserve(sample.size());
    for (auto& traj : sample.trajectories)
        block.tails.emplace_back(traj.begin() + static_cast<long>(cut), traj.end());
    block.log_weights = std::move(sample.log_weights);
    state.trajectories =
        fixed_lag_stitch(std::move(heads), block, model, max_rejections, rng, local.threads,
                         state.time);
}

// Online smoother whose tails come from backward simulation over a sliding
// window of filter marginals instead of the trajectories' own recent past.
// The internal filter is a separate particle system with its own adaptive
// resampling; trajectories stay unweighted throughout.
template <typename State>
struct OnlineBsiState {
    TrajectorySample<State> trajectories;
    std::deque<WeightedSample<State>> window;  // filter marginals, oldest first
    long time = 0;
    long window_start = 0;  // time index of window.front()
};

template <StateSpaceModel M>
OnlineBsiState<typename M::State> online_smoother_bsi_init(const M& model,
                                                           const typename M::Observation& y0,
                                                           std::size_t n, RngStream& rng,
                                                           int threads = 1) {
    OnlineBsiState<typename M::State> state;
    state.trajectories = pf_init_trajectories(model, y0, n, rng, threads);
    state.window.push_back(detail::end_column_marginal(state.trajectories));
    state.trajectories.log_weights.clear();
    state.time = 0;
    state.window_start = 0;
    return state;
}

template <StateSpaceModel M>
void online_smoother_bsi_update(const M& model, OnlineBsiState<typename M::State>& state,
                                const typename M::Observation& y, int lag, int max_rejections,
                                const FilterOptions& opt, RngStream& rng) {
    using State = typename M::State;
    FilterOptions local = opt;
    local.time_index = ++state.time;
    auto& sample = state.trajectories;

    // Start-up: the trajectory sample is the filter, and the window stores its
    // pre-resample marginals so later backward draws share its support.
    if (state.time <= lag) {
        detail::propagate_and_weight(model, sample, y, local, rng);
        state.window.push_back(detail::end_column_marginal(sample));
        detail::resample_trajectories(sample, rng);
        sample.log_weights.clear();
        return;
    }

    WeightedSample<State> marginal = state.window.back();
    filter_update(model, marginal, y, local, rng);
    state.window.push_back(std::move(marginal));
    while (state.window.size() > static_cast<std::size_t>(lag) + 2) {
        state.window.pop_front();
        ++state.window_start;
    }
    const std::size_t n = sample.size();
    auto tails = backward_simulation(model, state.window, n, max_rejections, rng, local.threads,
                                     state.window_start);
    StitchBlock<State> block;
    block.tails = std::move(tails.trajectories);
    block.log_weights = uniform_log_weights(n);
    const std::size_t cut = static_cast<std::size_t>(state.time - lag - 1);
    auto heads = detail::take_heads(sample.trajectories, cut);
    state.trajectories =
        fixed_lag_stitch(std::move(heads), block, model, max_rejections, rng, local.threads,
                         state.time);
}

// Offline smoothing baseline: run the filter over the whole record keeping
// every marginal, then draw n_out trajectories by backward simulation.
template <StateSpaceModel M>
TrajectorySample<typename M::State> ffbsi_offline(const M& model,
                                                  const std::vector<typename M::Observation>& ys,
                                                  std::size_t n, int max_rejections,
                                                  const FilterOptions& opt, RngStream& rng) {
    if (ys.empty()) throw EmptySampleError("observation record is empty");
    std::vector<WeightedSample<typename M::State>> marginals;
    marginals.reserve(ys.size());
    marginals.push_back(pf_init(model, ys[0], n, rng, opt.threads));
    for (std::size_t t = 1; t < ys.size(); ++t) {
        FilterOptions local = opt;
        local.time_index = static_cast<long>(t);
        WeightedSample<typename M::State> next = marginals.back();
        filter_update(model, next, ys[t], local, rng);
        marginals.push_back(std::move(next));
    }
    return backward_simulation(model, marginals, n, max_rejections, rng, opt.threads, 0);
}

}  // namespace stitchsmc
