#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <cmath>
#include <cstddef>
#include <vector>

#include "stitchsmc/core/particle_filter.hpp"
#include "stitchsmc/oracle/discrete_hmm.hpp"
#include "stitchsmc/oracle/lin_gauss.hpp"
#include "stitchsmc/stitch/stitching.hpp"
#include "support/stats.hpp"
#include "support/toy_models.hpp"

using namespace stitchsmc;

namespace {

std::vector<double> normalised_logs(std::vector<double> w) {
    double total = 0.0;
    for (double x : w) total += x;
    for (double& x : w) x = std::log(x / total);
    return w;
}

}  // namespace

TEST_CASE("tails that already sit on the head keep their block weights") {
    LinGaussModel m(0.9, 0.5, 1.0, 0.2, 0.0, 1.0);
    const double head_end = 0.7;

    StitchBlock<double> block;
    block.tails = {{head_end, -0.3, 0.1}, {head_end, 0.4, 0.4}, {head_end, 1.2, -2.0},
                   {head_end, 0.7, 0.7}};
    block.log_weights = normalised_logs({0.1, 0.2, 0.3, 0.4});

    auto w = stitch_weights(m, head_end, block);
    REQUIRE(w[0] == Catch::Approx(0.1).margin(1e-12));
    REQUIRE(w[1] == Catch::Approx(0.2).margin(1e-12));
    REQUIRE(w[2] == Catch::Approx(0.3).margin(1e-12));
    REQUIRE(w[3] == Catch::Approx(0.4).margin(1e-12));
}

TEST_CASE("stitch weights follow the density ratios") {
    // Two equally weighted tails; moving tail 0's start onto the head doubles
    // its transition density while tail 1's is quartered: ratios 2 and 0.5,
    // so the stitch posterior is (0.8, 0.2).
    testmodels::FnModel m;
    m.trans_log = [](double prev, double next) {
        if (prev == 10.0 && next == 0.0) return std::log(1.0);
        if (prev == 20.0 && next == 1.0) return std::log(4.0);
        if (prev == 99.0 && next == 0.0) return std::log(2.0);
        if (prev == 99.0 && next == 1.0) return std::log(2.0);
        return stitchsmc::neg_inf;
    };

    StitchBlock<double> block;
    block.tails = {{10.0, 0.0, 5.0}, {20.0, 1.0, 6.0}};
    block.log_weights = normalised_logs({0.5, 0.5});

    auto w = stitch_weights(m, 99.0, block);
    REQUIRE(w[0] == Catch::Approx(0.8).margin(1e-12));
    REQUIRE(w[1] == Catch::Approx(0.2).margin(1e-12));
}

TEST_CASE("stitched tails recover the exact conditional window law") {
    // Tails come from a 10^5-particle filter over y_{0:6}; stitching them onto
    // a fixed head state z must reproduce p(x_{4:6} | x_4's parent = z, y_{4:6})
    // exactly as the block grows, whatever law the tails' own ancestors follow.
    auto hmm = teststats::random_mixing_hmm(301, 3, 3);
    auto ys = teststats::hmm_simulate_observations(hmm, 7, 302);
    const int k = 3;
    const std::size_t n_block = 100000;
    const int z = 1;

    RngStream rng(303);
    auto s = pf_init_trajectories(hmm, ys[0], n_block, rng);
    FilterOptions opt;
    opt.threads = 4;
    for (std::size_t t = 1; t < ys.size(); ++t) pf_update(hmm, s, ys[t], opt, rng);

    StitchBlock<int> block;
    block.tails.reserve(n_block);
    for (const auto& traj : s.trajectories)
        block.tails.emplace_back(traj.begin() + 3, traj.end());  // coords 3..6
    block.log_weights = s.log_weights.empty() ? uniform_log_weights(n_block)
                                              : std::move(s.log_weights);

    // Exact conditional by enumeration over the 27 window paths.
    std::vector<double> exact(27, 0.0);
    double total = 0.0;
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b)
            for (int c = 0; c < k; ++c) {
                double w = hmm.transition[z][a] * hmm.emission[a][ys[4]] *
                           hmm.transition[a][b] * hmm.emission[b][ys[5]] *
                           hmm.transition[b][c] * hmm.emission[c][ys[6]];
                exact[9 * a + 3 * b + c] = w;
                total += w;
            }
    for (double& p : exact) p /= total;

    auto empirical_tail_law = [&](const TrajectorySample<int>& out) {
        std::vector<double> freq(27, 0.0);
        for (const auto& traj : out.trajectories)
            freq[9 * traj[1] + 3 * traj[2] + traj[3]] += 1.0;
        for (double& f : freq) f /= static_cast<double>(out.size());
        return freq;
    };

    SECTION("direct categorical draws") {
        // The direct path rescores the whole block per head; thin the tails
        // tenfold to keep the quadratic cost down.
        StitchBlock<int> thin;
        std::vector<double> lw;
        for (std::size_t j = 0; j < block.size(); j += 10) {
            thin.tails.push_back(block.tails[j]);
            lw.push_back(block.log_weights[j]);
        }
        thin.log_weights = lw;
        double lse = log_sum_exp(lw);
        for (double& x : thin.log_weights) x -= lse;

        std::vector<std::vector<int>> heads(20000, std::vector<int>{z});
        RngStream sr(304);
        auto out = fixed_lag_stitch(heads, thin, hmm, 0, sr, 4);
        REQUIRE(out.uniform());
        REQUIRE(out.length() == 4);
        REQUIRE(tv_distance(empirical_tail_law(out), exact) < 0.05);
    }

    SECTION("rejection draws with categorical fallback") {
        std::vector<std::vector<int>> heads(100000, std::vector<int>{z});
        RngStream sr(305);
        auto out = fixed_lag_stitch(heads, block, hmm, 30, sr, 4);
        REQUIRE(tv_distance(empirical_tail_law(out), exact) < 0.05);
    }
}

TEST_CASE("constant transition density accepts every first proposal") {
    // With p(x'|x) = c and bound c the acceptance ratio is exactly 1, so the
    // rejection loop must cost one kernel evaluation per head and the chosen
    // tails must follow the block weights themselves.
    auto calls = std::make_shared<std::atomic<long>>(0);
    testmodels::FnModel m;
    m.trans_log = [calls](double, double) {
        calls->fetch_add(1, std::memory_order_relaxed);
        return std::log(0.37);
    };
    m.bound = std::log(0.37);

    const std::size_t n_tails = 6;
    StitchBlock<double> block;
    std::vector<double> raw(n_tails);
    for (std::size_t j = 0; j < n_tails; ++j) {
        double v = static_cast<double>(j);
        block.tails.push_back({v, 100.0 + v, 200.0 + v});
        raw[j] = v + 1.0;
    }
    block.log_weights = normalised_logs(raw);

    const std::size_t n_heads = 20000;
    std::vector<std::vector<double>> heads(n_heads, std::vector<double>{5.0});
    RngStream rng(401);
    auto out = fixed_lag_stitch(heads, block, m, 3, rng, 1);

    REQUIRE(calls->load() == static_cast<long>(n_tails + n_heads));

    std::vector<double> counts(n_tails, 0.0);
    for (const auto& traj : out.trajectories)
        counts[static_cast<std::size_t>(traj[1] - 100.0)] += 1.0;
    REQUIRE(teststats::chi2_gof_p(counts, linear_weights(block.log_weights)) > 0.01);
}

TEST_CASE("rejection and direct stitching draw from the same law") {
    testmodels::FnModel m;
    m.trans_log = [](double prev, double next) { return -0.5 * (next - prev) * (next - prev); };
    m.bound = 0.0;

    const std::size_t n_tails = 12;
    StitchBlock<double> block;
    std::vector<double> raw(n_tails);
    for (std::size_t j = 0; j < n_tails; ++j) {
        double v = static_cast<double>(j);
        block.tails.push_back({0.25 * v - 1.0, 0.4 * v - 2.0, 0.0});
        raw[j] = 1.0 + ((j * 7) % 5);
    }
    block.log_weights = normalised_logs(raw);

    const std::size_t reps = 100000;
    std::vector<std::vector<double>> heads(reps, std::vector<double>{0.3});

    auto index_counts = [&](int max_rejections, std::uint64_t seed) {
        RngStream rng(seed);
        auto out = fixed_lag_stitch(heads, block, m, max_rejections, rng, 4);
        std::vector<double> counts(n_tails, 0.0);
        for (const auto& traj : out.trajectories) {
            auto j = static_cast<std::size_t>(std::lround((traj[1] + 2.0) / 0.4));
            counts[j] += 1.0;
        }
        return counts;
    };

    auto direct = index_counts(0, 501);
    auto hybrid = index_counts(5, 502);
    REQUIRE(teststats::chi2_two_sample_p(direct, hybrid) > 0.01);
}

TEST_CASE("rejection stitching refuses to run without a density bound") {
    testmodels::FnModel m;  // bound stays empty
    StitchBlock<double> block;
    block.tails = {{0.0, 1.0}, {0.5, 1.5}};
    block.log_weights = uniform_log_weights(2);
    std::vector<std::vector<double>> heads(4, std::vector<double>{0.0});

    RngStream rng(601);
    REQUIRE_NOTHROW(fixed_lag_stitch(heads, block, m, 0, rng));
    REQUIRE_THROWS_AS(fixed_lag_stitch(heads, block, m, 8, rng), MissingBoundError);
}

TEST_CASE("a head no tail can continue reports its position") {
    testmodels::FnModel m;
    m.trans_log = [](double prev, double) {
        return prev == 7.0 ? stitchsmc::neg_inf : 0.0;
    };

    StitchBlock<double> block;
    block.tails = {{0.0, 1.0, 2.0}, {0.5, 1.5, 2.5}};
    block.log_weights = uniform_log_weights(2);
    std::vector<std::vector<double>> heads = {{1.0}, {7.0}, {2.0}};

    RngStream rng(701);
    try {
        fixed_lag_stitch(heads, block, m, 0, rng, 1, 42);
        FAIL("expected AllWeightsZeroError");
    } catch (const AllWeightsZeroError& e) {
        REQUIRE(e.time_index == 42);
        REQUIRE(e.particle_index == 1);
    }
}

TEST_CASE("a block with no mass is rejected up front") {
    testmodels::FnModel m;
    m.trans_log = [](double, double) { return stitchsmc::neg_inf; };
    m.bound = 0.0;

    StitchBlock<double> block;
    block.tails = {{0.0, 1.0}, {0.5, 1.5}};
    block.log_weights = uniform_log_weights(2);
    std::vector<std::vector<double>> heads(2, std::vector<double>{0.0});

    RngStream rng(702);
    REQUIRE_THROWS_AS(fixed_lag_stitch(heads, block, m, 4, rng, 1, 9), AllWeightsZeroError);
}

TEST_CASE("heads pass through unmodified and gain the tail's later coordinates") {
    LinGaussModel m;
    RngStream rng(801);

    const std::size_t n_heads = 50;
    const std::size_t head_len = 4;
    std::vector<std::vector<double>> heads(n_heads);
    for (auto& h : heads) {
        h.resize(head_len);
        for (auto& x : h) x = rng.normal();
    }
    auto copy = heads;

    StitchBlock<double> block;
    for (std::size_t j = 0; j < 30; ++j)
        block.tails.push_back({rng.normal(), rng.normal(), rng.normal()});
    block.log_weights = uniform_log_weights(30);

    auto out = fixed_lag_stitch(heads, block, m, 0, rng, 2);
    REQUIRE(out.size() == n_heads);
    REQUIRE(out.length() == head_len + 2);
    REQUIRE(out.uniform());
    for (std::size_t i = 0; i < n_heads; ++i) {
        for (std::size_t t = 0; t < head_len; ++t)
            REQUIRE(out.trajectories[i][t] == copy[i][t]);
        bool tail_known = false;
        for (const auto& tail : block.tails)
            if (tail[1] == out.trajectories[i][head_len] && tail[2] == out.trajectories[i][head_len + 1])
                tail_known = true;
        REQUIRE(tail_known);
    }
}

namespace {

// Minimal model whose rebase hook tags the joined coordinate, to pin down
// where in the output the hook is applied.
struct RebaseProbe {
    using State = double;
    using Observation = double;

    State initial_sample(Observation y, RngStream& rng) const { return y + rng.normal(); }
    double initial_log_density(State x, Observation y) const { return log_normal_pdf(x, y, 1.0); }
    double transition_log_density(State, State) const { return 0.0; }
    std::optional<double> transition_log_bound() const { return 0.0; }
    State proposal_sample(State prev, Observation, RngStream& rng) const {
        return prev + rng.normal();
    }
    double proposal_log_density(State prev, State next, Observation) const {
        return log_normal_pdf(next, prev, 1.0);
    }
    double observation_log_density(State, Observation) const { return 0.0; }
    State rebase_onto(State, State next) const { return next + 1000.0; }
};

}  // namespace

TEST_CASE("the rebase hook rewrites exactly the joined coordinate") {
    RebaseProbe m;
    StitchBlock<double> block;
    block.tails = {{0.1, 0.2, 0.3, 0.4}};
    block.log_weights = uniform_log_weights(1);
    std::vector<std::vector<double>> heads = {{9.0, 8.0}};

    RngStream rng(901);
    auto out = fixed_lag_stitch(heads, block, m, 0, rng);
    REQUIRE(out.trajectories[0] == std::vector<double>{9.0, 8.0, 1000.2, 0.3, 0.4});
}
