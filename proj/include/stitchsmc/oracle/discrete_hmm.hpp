#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "stitchsmc/core/errors.hpp"
#include "stitchsmc/core/model.hpp"
#include "stitchsmc/core/rng.hpp"
#include "stitchsmc/core/weighted_sample.hpp"

namespace stitchsmc {

// Finite-state hidden Markov model with categorical emissions. Small state
// spaces admit exact enumeration of whole trajectory laws, which is what the
// smoothing algorithms are validated against.
struct DiscreteHmm {
    std::vector<double> initial;
    std::vector<std::vector<double>> transition;  // row-stochastic
    std::vector<std::vector<double>> emission;    // row-stochastic

    using State = int;
    using Observation = int;

    DiscreteHmm(std::vector<double> initial_, std::vector<std::vector<double>> transition_,
                std::vector<std::vector<double>> emission_)
        : initial(std::move(initial_)),
          transition(std::move(transition_)),
          emission(std::move(emission_)) {
        check_distribution(initial, "initial distribution");
        if (transition.size() != initial.size() || emission.size() != initial.size())
            throw std::invalid_argument("matrix row counts must match the state count");
        for (const auto& row : transition) {
            if (row.size() != initial.size())
                throw std::invalid_argument("transition matrix must be square");
            check_distribution(row, "transition row");
        }
        for (const auto& row : emission) check_distribution(row, "emission row");
    }

    std::size_t num_states() const { return initial.size(); }
    std::size_t num_symbols() const { return emission.front().size(); }

    State initial_sample(Observation y0, RngStream& rng) const {
        return draw(initial_posterior(y0), rng);
    }
    double initial_log_density(State x0, Observation y0) const {
        double p = initial_posterior(y0)[static_cast<std::size_t>(x0)];
        return p > 0.0 ? std::log(p) : neg_inf;
    }
    double transition_log_density(State prev, State next) const {
        double p = transition[static_cast<std::size_t>(prev)][static_cast<std::size_t>(next)];
        return p > 0.0 ? std::log(p) : neg_inf;
    }
    std::optional<double> transition_log_bound() const {
        double m = 0.0;
        for (const auto& row : transition)
            for (double p : row) m = std::max(m, p);
        return std::log(m);
    }
    State proposal_sample(State prev, Observation y, RngStream& rng) const {
        return draw(conditional_posterior(prev, y), rng);
    }
    double proposal_log_density(State prev, State next, Observation y) const {
        double p = conditional_posterior(prev, y)[static_cast<std::size_t>(next)];
        return p > 0.0 ? std::log(p) : neg_inf;
    }
    double observation_log_density(State x, Observation y) const {
        double p = emission[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)];
        return p > 0.0 ? std::log(p) : neg_inf;
    }

    // p(x_0 | y_0) and p(x_t | x_{t-1}, y_t): the locally optimal proposal.
    std::vector<double> initial_posterior(Observation y0) const {
        std::vector<double> w(num_states());
        double total = 0.0;
        for (std::size_t s = 0; s < w.size(); ++s) {
            w[s] = initial[s] * emission[s][static_cast<std::size_t>(y0)];
            total += w[s];
        }
        if (!(total > 0.0)) throw AllWeightsZeroError("observation has zero likelihood", 0);
        for (double& x : w) x /= total;
        return w;
    }
    std::vector<double> conditional_posterior(State prev, Observation y) const {
        std::vector<double> w(num_states());
        double total = 0.0;
        for (std::size_t s = 0; s < w.size(); ++s) {
            w[s] = transition[static_cast<std::size_t>(prev)][s] *
                   emission[s][static_cast<std::size_t>(y)];
            total += w[s];
        }
        if (!(total > 0.0))
            throw AllWeightsZeroError("no successor state can emit the observation");
        for (double& x : w) x /= total;
        return w;
    }

private:
    static void check_distribution(const std::vector<double>& w, const char* what) {
        if (w.empty()) throw std::invalid_argument(std::string(what) + " is empty");
        double total = 0.0;
        for (double p : w) {
            if (p < 0.0) throw std::invalid_argument(std::string(what) + " has a negative entry");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw std::invalid_argument(std::string(what) + " does not sum to one");
    }

    static State draw(const std::vector<double>& w, RngStream& rng) {
        double u = rng.uniform();
        double acc = 0.0;
        for (std::size_t s = 0; s < w.size(); ++s) {
            acc += w[s];
            if (u < acc) return static_cast<int>(s);
        }
        return static_cast<int>(w.size()) - 1;
    }
};

// Row-major index of a path (x_0, ..., x_T) in a K^(T+1) table; x_0 is the
// most significant digit.
inline std::size_t path_index(const std::vector<int>& path, std::size_t k) {
    std::size_t idx = 0;
    for (int x : path) idx = idx * k + static_cast<std::size_t>(x);
    return idx;
}

inline std::vector<int> path_at(std::size_t index, std::size_t k, std::size_t length) {
    std::vector<int> path(length);
    for (std::size_t t = length; t-- > 0;) {
        path[t] = static_cast<int>(index % k);
        index /= k;
    }
    return path;
}

namespace detail {

inline std::size_t checked_table_cells(std::size_t k, std::size_t length) {
    double cells = std::pow(static_cast<double>(k), static_cast<double>(length));
    if (cells > 1e7)
        throw TooLargeError("trajectory table would exceed the enumeration cap");
    std::size_t n = 1;
    for (std::size_t t = 0; t < length; ++t) n *= k;
    return n;
}

// p(x_{t0:t1} | x_{t0-1} = parent, y_{t0:t1}) for every parent, as parent ->
// normalised table over K^(t1-t0+1) paths. Enumeration, no recursions.
inline std::vector<std::vector<double>> windowed_block_conditional(const DiscreteHmm& hmm,
                                                                   const std::vector<int>& ys,
                                                                   std::size_t t0,
                                                                   std::size_t t1) {
    const std::size_t k = hmm.num_states();
    const std::size_t span = t1 - t0 + 1;
    const std::size_t cells = checked_table_cells(k, span);
    std::vector<std::vector<double>> out(k, std::vector<double>(cells));
    for (std::size_t parent = 0; parent < k; ++parent) {
        double total = 0.0;
        for (std::size_t idx = 0; idx < cells; ++idx) {
            auto path = path_at(idx, k, span);
            double p = 1.0;
            std::size_t prev = parent;
            for (std::size_t s = 0; s < span && p > 0.0; ++s) {
                std::size_t cur = static_cast<std::size_t>(path[s]);
                p *= hmm.transition[prev][cur] *
                     hmm.emission[cur][static_cast<std::size_t>(ys[t0 + s])];
                prev = cur;
            }
            out[parent][idx] = p;
            total += p;
        }
        if (total > 0.0)
            for (double& p : out[parent]) p /= total;
    }
    return out;
}

}  // namespace detail

// Exact joint smoothing law p(x_{0:T} | y_{0:T}) as a normalised table over
// K^(T+1) paths indexed by path_index.
inline std::vector<double> hmm_exact_joint(const DiscreteHmm& hmm, const std::vector<int>& ys) {
    const std::size_t k = hmm.num_states();
    const std::size_t cells = detail::checked_table_cells(k, ys.size());
    std::vector<double> table(cells);
    double total = 0.0;
    for (std::size_t idx = 0; idx < cells; ++idx) {
        auto path = path_at(idx, k, ys.size());
        double p = hmm.initial[static_cast<std::size_t>(path[0])] *
                   hmm.emission[static_cast<std::size_t>(path[0])][static_cast<std::size_t>(ys[0])];
        for (std::size_t t = 1; t < path.size() && p > 0.0; ++t) {
            p *= hmm.transition[static_cast<std::size_t>(path[t - 1])]
                               [static_cast<std::size_t>(path[t])] *
                 hmm.emission[static_cast<std::size_t>(path[t])][static_cast<std::size_t>(ys[t])];
        }
        table[idx] = p;
        total += p;
    }
    if (!(total > 0.0)) throw AllWeightsZeroError("observation record has zero likelihood");
    for (double& p : table) p /= total;
    return table;
}

// The law targeted by lag-L trajectory approximations:
//   p(x_0 | y_{0:L})
//   * prod_{t=1}^{T-L-1} p(x_t | x_{t-1}, y_{t:t+L})
//   * p(x_{T-L:T} | x_{T-L-1}, y_{T-L:T}),
// every conditional computed by enumeration over its observation window.
// Coordinates carry only a lag window of future observations; the final
// window is exact, earlier coordinates are frozen early.
inline std::vector<double> hmm_exact_fixed_lag_joint(const DiscreteHmm& hmm,
                                                     const std::vector<int>& ys, int lag) {
    const std::size_t k = hmm.num_states();
    const std::size_t len = ys.size();
    detail::checked_table_cells(k, len);
    const std::size_t T = len - 1;
    const std::size_t L = static_cast<std::size_t>(lag);
    if (L >= T) return hmm_exact_joint(hmm, ys);

    std::vector<int> head_ys(ys.begin(), ys.begin() + static_cast<long>(L) + 1);
    auto head_table = hmm_exact_joint(hmm, head_ys);
    std::vector<double> table(k, 0.0);  // marginal of x_0 under the lag-L window
    {
        std::size_t below = 1;
        for (std::size_t s = 1; s <= L; ++s) below *= k;
        for (std::size_t idx = 0; idx < head_table.size(); ++idx)
            table[idx / below] += head_table[idx];
    }

    for (std::size_t t = 1; t + L < T; ++t) {
        auto block = detail::windowed_block_conditional(hmm, ys, t, t + L);
        // marginal of the block's first coordinate, per parent
        std::size_t below = 1;
        for (std::size_t s = 1; s <= L; ++s) below *= k;
        std::vector<double> next(table.size() * k, 0.0);
        for (std::size_t idx = 0; idx < table.size(); ++idx) {
            if (table[idx] == 0.0) continue;
            std::size_t parent = idx % k;
            for (std::size_t cell = 0; cell < block[parent].size(); ++cell)
                next[idx * k + cell / below] += table[idx] * block[parent][cell];
        }
        table = std::move(next);
    }

    auto final_block = detail::windowed_block_conditional(hmm, ys, T - L, T);
    const std::size_t tail_cells = final_block[0].size();
    std::vector<double> out(table.size() * tail_cells, 0.0);
    for (std::size_t idx = 0; idx < table.size(); ++idx) {
        if (table[idx] == 0.0) continue;
        std::size_t parent = idx % k;
        for (std::size_t cell = 0; cell < tail_cells; ++cell)
            out[idx * tail_cells + cell] = table[idx] * final_block[parent][cell];
    }
    return out;
}

// Exact filter marginal p(x_t | y_{0:t}) by the forward recursion.
inline std::vector<double> hmm_filter_marginal(const DiscreteHmm& hmm, const std::vector<int>& ys,
                                               std::size_t t) {
    const std::size_t k = hmm.num_states();
    std::vector<double> alpha(k);
    for (std::size_t s = 0; s < k; ++s)
        alpha[s] = hmm.initial[s] * hmm.emission[s][static_cast<std::size_t>(ys[0])];
    for (std::size_t step = 1; step <= t; ++step) {
        std::vector<double> next(k, 0.0);
        for (std::size_t s = 0; s < k; ++s)
            for (std::size_t b = 0; b < k; ++b) next[b] += alpha[s] * hmm.transition[s][b];
        for (std::size_t b = 0; b < k; ++b)
            next[b] *= hmm.emission[b][static_cast<std::size_t>(ys[step])];
        alpha = std::move(next);
    }
    double total = 0.0;
    for (double p : alpha) total += p;
    if (!(total > 0.0)) throw AllWeightsZeroError("observation prefix has zero likelihood");
    for (double& p : alpha) p /= total;
    return alpha;
}

// Marginal of one time coordinate of a path table over length coordinates.
inline std::vector<double> table_marginal(const std::vector<double>& table, std::size_t k,
                                          std::size_t length, std::size_t t) {
    std::vector<double> out(k, 0.0);
    std::size_t below = 1;
    for (std::size_t s = t + 1; s < length; ++s) below *= k;
    for (std::size_t idx = 0; idx < table.size(); ++idx) out[(idx / below) % k] += table[idx];
    return out;
}

// Total variation distance between distributions on a shared index set.
inline double tv_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
    return 0.5 * acc;
}

}  // namespace stitchsmc
