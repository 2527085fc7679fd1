#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstddef>
#include <vector>

#include "stitchsmc/core/particle_filter.hpp"
#include "stitchsmc/oracle/discrete_hmm.hpp"
#include "stitchsmc/oracle/lin_gauss.hpp"
#include "stitchsmc/stitch/backward_sim.hpp"
#include "support/stats.hpp"
#include "support/toy_models.hpp"

using namespace stitchsmc;

TEST_CASE("a single marginal reduces to multinomial resampling") {
    WeightedSample<double> last;
    last.particles = {1.0, 2.0, 3.0};
    last.log_weights = {std::log(0.2), std::log(0.3), std::log(0.5)};
    std::vector<WeightedSample<double>> marginals = {last};

    testmodels::FnModel m;
    const std::size_t n_out = 1000;
    RngStream rng(11);
    auto out = backward_simulation(m, marginals, n_out, 0, rng);

    REQUIRE(out.size() == n_out);
    REQUIRE(out.length() == 1);
    REQUIRE(out.uniform());

    RngStream ref_rng(11);
    auto idx = multinomial_indices(last.log_weights, n_out, ref_rng);
    for (std::size_t i = 0; i < n_out; ++i)
        REQUIRE(out.trajectories[i][0] == last.particles[idx[i]]);
}

TEST_CASE("ancestor choice follows weight times transition density") {
    // Equal filter weights, transition densities to the fixed endpoint 2 and
    // 0.5: ancestors must come up in ratio 0.8 : 0.2.
    testmodels::FnModel m;
    m.trans_log = [](double prev, double next) {
        if (prev == 10.0 && next == 99.0) return std::log(2.0);
        if (prev == 20.0 && next == 99.0) return std::log(0.5);
        return stitchsmc::neg_inf;
    };

    std::vector<WeightedSample<double>> marginals(2);
    marginals[0].particles = {10.0, 20.0};
    marginals[0].log_weights = uniform_log_weights(2);
    marginals[1].particles = {99.0};
    marginals[1].log_weights = {0.0};

    RngStream rng(21);
    auto out = backward_simulation(m, marginals, 20000, 0, rng, 2);

    std::vector<double> counts(2, 0.0);
    for (const auto& traj : out.trajectories) counts[traj[0] == 20.0 ? 1 : 0] += 1.0;
    REQUIRE(teststats::chi2_gof_p(counts, {0.8, 0.2}) > 0.01);
}

TEST_CASE("backward draws match the exact smoother on a linear Gaussian model") {
    LinGaussModel m(0.9, 0.3, 1.0, 0.5, 0.0, 1.0);

    RngStream sim(1, 7);
    std::vector<double> ys;
    double x = m.m0 + std::sqrt(m.v0) * sim.normal();
    for (int t = 0; t <= 50; ++t) {
        ys.push_back(m.c * x + std::sqrt(m.r) * sim.normal());
        x = m.a * x + std::sqrt(m.q) * sim.normal();
    }
    auto rts = rts_smoother(m, ys);

    RngStream rng(1);
    const std::size_t n_filter = 4000, n_out = 2000;
    std::vector<WeightedSample<double>> marginals;
    marginals.push_back(pf_init(m, ys[0], n_filter, rng, 4));
    FilterOptions opt;
    opt.threads = 4;
    for (std::size_t t = 1; t < ys.size(); ++t) {
        auto s = marginals.back();
        filter_update(m, s, ys[t], opt, rng);
        marginals.push_back(std::move(s));
    }
    auto bs = backward_simulation(m, marginals, n_out, 8, rng, 4);

    // Draws share one filter cloud, so the naive per-draw standard error
    // understates the total Monte Carlo error; the bands below leave room for
    // that correlation while staying an order of magnitude under the z values
    // a wrong smoother produces.
    for (std::size_t t = 0; t < ys.size(); ++t) {
        std::vector<double> col;
        col.reserve(n_out);
        for (const auto& traj : bs.trajectories) col.push_back(traj[t]);
        auto mom = teststats::unweighted_moments(col);
        double var = 0.0;
        for (double v : col) var += (v - mom.mean) * (v - mom.mean);
        var /= static_cast<double>(n_out - 1);
        double se_var = var * std::sqrt(2.0 / (n_out - 1));
        REQUIRE(mom.mean == Catch::Approx(rts[t].mean).margin(6.0 * mom.se));
        REQUIRE(var == Catch::Approx(rts[t].var).margin(7.0 * se_var));
    }
}

TEST_CASE("rejection and direct backward passes agree in law") {
    auto hmm = teststats::random_mixing_hmm(21, 3, 3);
    auto ys = teststats::hmm_simulate_observations(hmm, 5, 22);

    RngStream rng(23);
    std::vector<WeightedSample<int>> marginals;
    marginals.push_back(pf_init(hmm, ys[0], 2000, rng));
    FilterOptions opt;
    for (std::size_t t = 1; t < ys.size(); ++t) {
        auto s = marginals.back();
        filter_update(hmm, s, ys[t], opt, rng);
        marginals.push_back(std::move(s));
    }

    auto path_counts = [&](int max_rejections, std::uint64_t seed) {
        RngStream r(seed);
        auto out = backward_simulation(hmm, marginals, 20000, max_rejections, r, 4);
        std::vector<double> counts(243, 0.0);
        for (const auto& traj : out.trajectories) {
            std::size_t cell = 0;
            for (int v : traj) cell = cell * 3 + static_cast<std::size_t>(v);
            counts[cell] += 1.0;
        }
        return counts;
    };

    REQUIRE(teststats::chi2_two_sample_p(path_counts(0, 31), path_counts(8, 32)) > 0.01);
}

TEST_CASE("backward simulation rejects an empty window and a missing bound") {
    testmodels::FnModel m;  // no bound
    std::vector<WeightedSample<double>> empty;
    RngStream rng(41);
    REQUIRE_THROWS_AS(backward_simulation(m, empty, 10, 0, rng), EmptySampleError);

    std::vector<WeightedSample<double>> marginals(2);
    marginals[0].particles = {0.0};
    marginals[0].log_weights = {0.0};
    marginals[1].particles = {1.0};
    marginals[1].log_weights = {0.0};
    REQUIRE_THROWS_AS(backward_simulation(m, marginals, 10, 4, rng), MissingBoundError);
    REQUIRE_NOTHROW(backward_simulation(m, marginals, 10, 0, rng));
}

TEST_CASE("an endpoint no ancestor can reach reports its position") {
    testmodels::FnModel m;
    m.trans_log = [](double, double next) {
        return next == 99.0 ? stitchsmc::neg_inf : 0.0;
    };

    std::vector<WeightedSample<double>> marginals(2);
    marginals[0].particles = {1.0, 2.0};
    marginals[0].log_weights = uniform_log_weights(2);
    marginals[1].particles = {99.0};
    marginals[1].log_weights = {0.0};

    RngStream rng(51);
    try {
        backward_simulation(m, marginals, 5, 0, rng, 1, 30);
        FAIL("expected AllWeightsZeroError");
    } catch (const AllWeightsZeroError& e) {
        REQUIRE(e.time_index == 30);
        REQUIRE(e.particle_index == 0);
    }
}

namespace {

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

TEST_CASE("every joined coordinate is rebased onto its chosen ancestor") {
    RebaseProbe m;
    std::vector<WeightedSample<double>> marginals(3);
    marginals[0].particles = {1.0, 2.0};
    marginals[0].log_weights = uniform_log_weights(2);
    marginals[1].particles = {5.0};
    marginals[1].log_weights = {0.0};
    marginals[2].particles = {7.0};
    marginals[2].log_weights = {0.0};

    RngStream rng(61);
    auto out = backward_simulation(m, marginals, 8, 2, rng);
    for (const auto& traj : out.trajectories) {
        REQUIRE((traj[0] == 1.0 || traj[0] == 2.0));
        REQUIRE(traj[1] == 1005.0);
        REQUIRE(traj[2] == 1007.0);
    }
}
