#pragma once

#include <cmath>
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

// Candidate trajectory tails for one stitching step. tails[j] covers the last
// lag+2 time steps; tails[j][0] is the overlap coordinate, the tail's own
// copy of the time step the heads end at. It is carried solely so stitch
// weights can be evaluated and is dropped when a tail is joined to a head.
template <typename State>
struct StitchBlock {
    std::vector<std::vector<State>> tails;
    std::vector<double> log_weights;  // normalised

    std::size_t size() const { return tails.size(); }
};

// Posterior over which tail continues a head ending in head_end:
//   w_j  proportional to  w~_j * p(tail_j[1] | head_end) / p(tail_j[1] | tail_j[0]).
// The denominators may be precomputed (one per tail) and shared across heads.
template <StateSpaceModel M>
std::vector<double> stitch_log_weights(const M& model, const typename M::State& head_end,
                                       const StitchBlock<typename M::State>& block,
                                       const std::vector<double>& log_denominators,
                                       long time_index = -1, long head_index = -1) {
    std::vector<double> lw(block.size());
    for (std::size_t j = 0; j < block.size(); ++j) {
        if (block.log_weights[j] == neg_inf || log_denominators[j] == neg_inf) {
            lw[j] = neg_inf;  // a tail its own ancestor could not produce carries no mass
            continue;
        }
        double num = model.transition_log_density(head_end, block.tails[j][1]);
        lw[j] = num == neg_inf ? neg_inf : block.log_weights[j] + num - log_denominators[j];
    }
    double lse = log_sum_exp(lw);
    if (lse == neg_inf)
        throw AllWeightsZeroError("no tail is compatible with the head", time_index, head_index);
    for (double& x : lw) x -= lse;
    return lw;
}

template <StateSpaceModel M>
std::vector<double> transition_log_denominators(const M& model,
                                                const StitchBlock<typename M::State>& block,
                                                int threads = 1) {
    std::vector<double> denom(block.size());
    parallel_for(block.size(), threads, [&](std::size_t j) {
        denom[j] = block.log_weights[j] == neg_inf
                       ? 0.0
                       : model.transition_log_density(block.tails[j][0], block.tails[j][1]);
    });
    return denom;
}

// Normalised linear stitch weights for one head.
template <StateSpaceModel M>
std::vector<double> stitch_weights(const M& model, const typename M::State& head_end,
                                   const StitchBlock<typename M::State>& block) {
    return linear_weights(
        stitch_log_weights(model, head_end, block, transition_log_denominators(model, block)));
}

// Joins every head to a tail drawn from its stitch weights, giving an
// unweighted trajectory sample. Heads are never modified, only extended; the
// tail's overlap coordinate is dropped in favour of the head's own.
//
// max_rejections > 0 enables the hybrid scheme: up to that many proposals
// from the head-independent categorical w~_j / p(tail_j[1] | tail_j[0]),
// each accepted with probability p(tail_j[1] | head_end) / rho, before
// falling back to a direct draw from the exact stitch weights. Requires
// transition_log_bound(); the accepted law equals the direct law for every
// max_rejections, so the knob trades constants, not correctness.
template <StateSpaceModel M>
TrajectorySample<typename M::State> fixed_lag_stitch(
    std::vector<std::vector<typename M::State>> heads,
    const StitchBlock<typename M::State>& block, const M& model, int max_rejections,
    RngStream& rng, int threads = 1, long time_index = -1) {
    using State = typename M::State;
    const std::size_t n_heads = heads.size();
    const std::size_t n_tails = block.size();

    double log_rho = 0.0;
    if (max_rejections > 0) {
        auto bound = model.transition_log_bound();
        if (!bound)
            throw MissingBoundError(
                "rejection stitching requires a transition density bound; "
                "set max_rejections = 0 for this model");
        log_rho = *bound;
    }

    auto denom = transition_log_denominators(model, block, threads);

    // Head-independent proposal over tails, w~_j / denominator_j.
    std::vector<double> proposal_weights;
    if (max_rejections > 0) {
        proposal_weights.resize(n_tails);
        std::vector<double> lhat(n_tails);
        double max_lw = neg_inf;
        for (std::size_t j = 0; j < n_tails; ++j) {
            lhat[j] = block.log_weights[j] == neg_inf || denom[j] == neg_inf
                          ? neg_inf
                          : block.log_weights[j] - denom[j];
            max_lw = std::max(max_lw, lhat[j]);
        }
        if (max_lw == neg_inf)
            throw AllWeightsZeroError("stitch block carries no mass", time_index);
        for (std::size_t j = 0; j < n_tails; ++j)
            proposal_weights[j] = lhat[j] == neg_inf ? 0.0 : std::exp(lhat[j] - max_lw);
    }
    const AliasTable alias = max_rejections > 0 ? AliasTable(proposal_weights) : AliasTable({1.0});

    const std::uint64_t key = rng.next_u64();
    std::vector<std::size_t> chosen(n_heads);
    parallel_for(n_heads, threads, [&](std::size_t i) {
        RngStream sub(key, static_cast<std::uint64_t>(i));
        const State& head_end = heads[i].back();
        bool done = false;
        for (int r = 0; r < max_rejections && !done; ++r) {
            std::size_t c = alias.sample(sub);
            if (proposal_weights[c] == 0.0) continue;
            double log_accept = rejection_log_kernel(model, head_end, block.tails[c][1]) - log_rho;
            if (std::log(sub.uniform_pos()) < log_accept) {
                chosen[i] = c;
                done = true;
            }
        }
        if (!done) {
            auto lw = stitch_log_weights(model, head_end, block, denom, time_index,
                                         static_cast<long>(i));
            chosen[i] = sample_categorical(linear_weights(lw), 1.0, sub);
        }
    });

    TrajectorySample<State> out;
    out.trajectories.reserve(n_heads);
    for (std::size_t i = 0; i < n_heads; ++i) {
        auto traj = std::move(heads[i]);
        const auto& tail = block.tails[chosen[i]];
        traj.push_back(rebase_onto(model, traj.back(), tail[1]));
        traj.insert(traj.end(), tail.begin() + 2, tail.end());
        out.trajectories.push_back(std::move(traj));
    }
    return out;
}

}  // namespace stitchsmc
