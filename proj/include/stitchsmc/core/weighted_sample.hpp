#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "stitchsmc/core/errors.hpp"

namespace stitchsmc {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

inline double log_sum_exp(const std::vector<double>& v) {
    double m = neg_inf;
    for (double x : v) m = std::max(m, x);
    if (m == neg_inf) return neg_inf;
    double acc = 0.0;
    for (double x : v) acc += std::exp(x - m);
    return m + std::log(acc);
}

inline std::vector<double> uniform_log_weights(std::size_t n) {
    return std::vector<double>(n, -std::log(static_cast<double>(n)));
}

// Normalises log weights in place so the exponentials sum to one.
inline void normalise_log_weights(std::vector<double>& log_weights, long time_index = -1) {
    double lse = log_sum_exp(log_weights);
    if (lse == neg_inf)
        throw AllWeightsZeroError("all candidate weights are zero", time_index);
    for (double& x : log_weights) x -= lse;
}

// exp of already-normalised log weights.
inline std::vector<double> linear_weights(const std::vector<double>& log_weights) {
    std::vector<double> w(log_weights.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(log_weights[i]);
    return w;
}

// Effective sample size 1 / sum(w_i^2) of normalised weights.
inline double ess(const std::vector<double>& log_weights) {
    if (log_weights.empty()) return 0.0;
    double acc = 0.0;
    for (double lw : log_weights) acc += std::exp(2.0 * lw);
    return 1.0 / acc;
}

// Particle approximation of a single-time marginal.
template <typename State>
struct WeightedSample {
    std::vector<State> particles;
    std::vector<double> log_weights;  // normalised: log_sum_exp == 0

    std::size_t size() const { return particles.size(); }
};

// Particle approximation of a trajectory law. Empty log_weights means the
// sample is unweighted (all weights 1/N).
template <typename State>
struct TrajectorySample {
    std::vector<std::vector<State>> trajectories;  // [particle][time]
    std::vector<double> log_weights;

    std::size_t size() const { return trajectories.size(); }
    bool uniform() const { return log_weights.empty(); }

    // Number of time steps covered; trajectories all share one length.
    std::size_t length() const { return trajectories.empty() ? 0 : trajectories.front().size(); }

    void ensure_explicit_weights() {
        if (log_weights.empty()) log_weights = uniform_log_weights(size());
    }
};

template <typename State>
double ess(const WeightedSample<State>& s) {
    return ess(s.log_weights);
}

template <typename State>
double ess(const TrajectorySample<State>& s) {
    if (s.uniform()) return static_cast<double>(s.size());
    return ess(s.log_weights);
}

}  // namespace stitchsmc
