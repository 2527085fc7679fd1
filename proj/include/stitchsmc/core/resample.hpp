#pragma once

#include <cstddef>
#include <numeric>
#include <vector>

#include "stitchsmc/core/errors.hpp"
#include "stitchsmc/core/rng.hpp"
#include "stitchsmc/core/weighted_sample.hpp"

namespace stitchsmc {

// n uniforms in ascending order in O(n), via normalised exponential spacings.
inline std::vector<double> sorted_uniforms(std::size_t n, RngStream& rng) {
    std::vector<double> u(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += rng.exponential();
        u[i] = acc;
    }
    acc += rng.exponential();
    for (double& x : u) x /= acc;
    return u;
}

// Inverse-CDF lookup of ascending points in a categorical distribution.
// One joint pass, O(n + k).
inline std::vector<std::size_t> indices_from_sorted_uniforms(
    const std::vector<double>& weights, const std::vector<double>& ascending) {
    std::vector<std::size_t> idx(ascending.size());
    std::size_t j = 0;
    double cdf = weights.empty() ? 0.0 : weights[0];
    for (std::size_t i = 0; i < ascending.size(); ++i) {
        while (ascending[i] > cdf && j + 1 < weights.size()) {
            ++j;
            cdf += weights[j];
        }
        idx[i] = j;
    }
    return idx;
}

// n_out iid draws from the categorical given by normalised log weights.
inline std::vector<std::size_t> multinomial_indices(const std::vector<double>& log_weights,
                                                    std::size_t n_out, RngStream& rng) {
    return indices_from_sorted_uniforms(linear_weights(log_weights), sorted_uniforms(n_out, rng));
}

template <typename State>
WeightedSample<State> multinomial_resample(const WeightedSample<State>& s, RngStream& rng) {
    auto idx = multinomial_indices(s.log_weights, s.size(), rng);
    WeightedSample<State> out;
    out.particles.reserve(s.size());
    for (std::size_t i : idx) out.particles.push_back(s.particles[i]);
    out.log_weights = uniform_log_weights(s.size());
    return out;
}

// One draw from an unnormalised linear-weight vector with known total mass.
inline std::size_t sample_categorical(const std::vector<double>& weights, double total,
                                      RngStream& rng) {
    double u = rng.uniform() * total;
    double acc = 0.0;
    std::size_t last = weights.size() - 1;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        acc += weights[k];
        if (u < acc) return k;
        if (weights[k] > 0.0) last = k;
    }
    return last;
}

// Walker alias table: O(n) construction, O(1) draws from a fixed categorical.
class AliasTable {
public:
    explicit AliasTable(const std::vector<double>& weights) {
        const std::size_t n = weights.size();
        accept_.assign(n, 1.0);
        alias_.resize(n);
        double total = std::accumulate(weights.begin(), weights.end(), 0.0);
        if (!(total > 0.0)) throw AllWeightsZeroError("alias table over zero-mass weights");
        std::vector<double> scaled(n);
        for (std::size_t i = 0; i < n; ++i) {
            scaled[i] = weights[i] * static_cast<double>(n) / total;
            alias_[i] = i;
        }
        std::vector<std::size_t> small, large;
        for (std::size_t i = 0; i < n; ++i) (scaled[i] < 1.0 ? small : large).push_back(i);
        while (!small.empty() && !large.empty()) {
            std::size_t s = small.back();
            small.pop_back();
            std::size_t l = large.back();
            large.pop_back();
            accept_[s] = scaled[s];
            alias_[s] = l;
            scaled[l] += scaled[s] - 1.0;
            (scaled[l] < 1.0 ? small : large).push_back(l);
        }
        // Leftovers are 1 up to rounding.
        for (std::size_t i : small) accept_[i] = 1.0;
        for (std::size_t i : large) accept_[i] = 1.0;
    }

    std::size_t sample(RngStream& rng) const {
        std::size_t j = static_cast<std::size_t>(rng.uniform_int(accept_.size()));
        return rng.uniform() < accept_[j] ? j : alias_[j];
    }

    std::size_t size() const { return accept_.size(); }

private:
    std::vector<double> accept_;
    std::vector<std::size_t> alias_;
};

}  // namespace stitchsmc
