#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "stitchsmc/core/errors.hpp"
#include "stitchsmc/core/model.hpp"
#include "stitchsmc/core/parallel.hpp"
#include "stitchsmc/core/resample.hpp"
#include "stitchsmc/core/rng.hpp"
#include "stitchsmc/core/weighted_sample.hpp"

namespace stitchsmc {

// Backward draws from a sequence of filter marginals: resample the final
// marginal, then walk backwards choosing each ancestor k with probability
// proportional to w~_t^(k) * p(x_{t+1} | x~_t^(k)). Returns an unweighted
// trajectory sample over the same time span.
//
// max_rejections works as in fixed_lag_stitch: proposals come straight from
// the filter weights and are accepted with probability
// p(x_{t+1} | candidate) / rho, with an exact direct draw as fallback.
// States with incoming-displacement bookkeeping are rewritten onto their
// chosen ancestors, so returned trajectories are internally consistent.
//
// `marginals` needs size() and operator[] yielding WeightedSample<State>;
// both vector and deque windows qualify.
template <StateSpaceModel M, typename Marginals>
TrajectorySample<typename M::State> backward_simulation(const M& model, const Marginals& marginals,
                                                        std::size_t n_out, int max_rejections,
                                                        RngStream& rng, int threads = 1,
                                                        long first_time_index = 0) {
    using State = typename M::State;
    const std::size_t span = marginals.size();
    if (span == 0) throw EmptySampleError("backward simulation over an empty window");

    double log_rho = 0.0;
    if (max_rejections > 0) {
        auto bound = model.transition_log_bound();
        if (!bound)
            throw MissingBoundError(
                "rejection backward simulation requires a transition density bound; "
                "set max_rejections = 0 for this model");
        log_rho = *bound;
    }

    TrajectorySample<State> out;
    out.trajectories.assign(n_out, std::vector<State>(span));

    {
        const auto& last = marginals[span - 1];
        auto idx = multinomial_indices(last.log_weights, n_out, rng);
        for (std::size_t i = 0; i < n_out; ++i)
            out.trajectories[i][span - 1] = last.particles[idx[i]];
    }

    for (std::size_t t = span - 1; t-- > 0;) {
        const auto& marginal = marginals[t];
        const std::size_t n_src = marginal.size();
        std::vector<double> proposal_weights;
        if (max_rejections > 0) {
            proposal_weights = linear_weights(marginal.log_weights);
        }
        const AliasTable alias =
            max_rejections > 0 ? AliasTable(proposal_weights) : AliasTable({1.0});
        const std::uint64_t key = rng.next_u64();
        parallel_for(n_out, threads, [&](std::size_t i) {
            RngStream sub(key, static_cast<std::uint64_t>(i));
            State& next = out.trajectories[i][t + 1];
            bool done = false;
            std::size_t pick = 0;
            for (int r = 0; r < max_rejections && !done; ++r) {
                std::size_t c = alias.sample(sub);
                if (proposal_weights[c] == 0.0) continue;
                double log_accept =
                    rejection_log_kernel(model, marginal.particles[c], next) - log_rho;
                if (std::log(sub.uniform_pos()) < log_accept) {
                    pick = c;
                    done = true;
                }
            }
            if (!done) {
                std::vector<double> lw(n_src);
                for (std::size_t k = 0; k < n_src; ++k) {
                    lw[k] = marginal.log_weights[k] == neg_inf
                                ? neg_inf
                                : marginal.log_weights[k] +
                                      model.transition_log_density(marginal.particles[k], next);
                }
                double lse = log_sum_exp(lw);
                if (lse == neg_inf)
                    throw AllWeightsZeroError("no ancestor is compatible with the sampled state",
                                              first_time_index + static_cast<long>(t),
                                              static_cast<long>(i));
                for (double& x : lw) x -= lse;
                pick = sample_categorical(linear_weights(lw), 1.0, sub);
            }
            out.trajectories[i][t] = marginal.particles[pick];
            next = rebase_onto(model, out.trajectories[i][t], next);
        });
    }
    return out;
}

}  // namespace stitchsmc
