#pragma once

#include <concepts>
#include <optional>
#include <utility>

#include "stitchsmc/core/rng.hpp"

namespace stitchsmc {

// State-space model as the filtering and smoothing algorithms see it. All
// densities are logarithmic; discretised models return log probability mass.
//
// Contract: initial_sample draws exactly from the initial law conditioned on
// the first observation, so a fresh particle set starts with uniform weights.
// transition_log_bound() returns log rho with transition density <= rho
// pointwise when a bound is available, nullopt otherwise.
template <typename M>
concept StateSpaceModel =
    requires(const M& m, const typename M::State& x, const typename M::Observation& y,
             RngStream& rng) {
        typename M::State;
        typename M::Observation;
        { m.initial_sample(y, rng) } -> std::same_as<typename M::State>;
        { m.initial_log_density(x, y) } -> std::convertible_to<double>;
        { m.transition_log_density(x, x) } -> std::convertible_to<double>;
        { m.transition_log_bound() } -> std::convertible_to<std::optional<double>>;
        { m.proposal_sample(x, y, rng) } -> std::same_as<typename M::State>;
        { m.proposal_log_density(x, x, y) } -> std::convertible_to<double>;
        { m.observation_log_density(x, y) } -> std::convertible_to<double>;
    };

// Optional capability: draw a proposal together with its log density when the
// two are cheaper to produce jointly.
template <typename M>
concept HasFusedProposal =
    requires(const M& m, const typename M::State& x, const typename M::Observation& y,
             RngStream& rng) {
        { m.proposal_sample_with_log_density(x, y, rng) }
            -> std::same_as<std::pair<typename M::State, double>>;
    };

// Optional capability: a cheaper acceptance kernel for rejection sampling.
// For each fixed predecessor it must be proportional to the transition
// density in the successor, with exp(kernel) <= exp(transition_log_bound()).
// Factors constant in the successor may be dropped; they cancel in the
// accepted law.
template <typename M>
concept HasRejectionKernel = requires(const M& m, const typename M::State& x) {
    { m.rejection_log_kernel(x, x) } -> std::convertible_to<double>;
};

// Optional capability: rewrite `next` so that its incoming displacement is
// expressed relative to `prev` instead of the predecessor it was generated
// from. Identity for models whose states carry no such bookkeeping.
template <typename M>
concept HasRebase = requires(const M& m, const typename M::State& x) {
    { m.rebase_onto(x, x) } -> std::same_as<typename M::State>;
};

template <StateSpaceModel M>
std::pair<typename M::State, double> propose_with_log_density(const M& m,
                                                              const typename M::State& prev,
                                                              const typename M::Observation& y,
                                                              RngStream& rng) {
    if constexpr (HasFusedProposal<M>) {
        return m.proposal_sample_with_log_density(prev, y, rng);
    } else {
        auto state = m.proposal_sample(prev, y, rng);
        double lq = m.proposal_log_density(prev, state, y);
        return {std::move(state), lq};
    }
}

template <StateSpaceModel M>
double rejection_log_kernel(const M& m, const typename M::State& prev,
                            const typename M::State& next) {
    if constexpr (HasRejectionKernel<M>) {
        return m.rejection_log_kernel(prev, next);
    } else {
        return m.transition_log_density(prev, next);
    }
}

template <StateSpaceModel M>
typename M::State rebase_onto(const M& m, const typename M::State& prev,
                              const typename M::State& next) {
    if constexpr (HasRebase<M>) {
        return m.rebase_onto(prev, next);
    } else {
        return next;
    }
}

}  // namespace stitchsmc
