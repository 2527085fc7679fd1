#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stitchsmc/core/errors.hpp"
#include "stitchsmc/core/particle_filter.hpp"
#include "stitchsmc/eval/metrics.hpp"
#include "stitchsmc/mapmatch/model.hpp"
#include "stitchsmc/mapmatch/viterbi.hpp"
#include "stitchsmc/stitch/smoothers.hpp"

namespace stitchsmc {

enum class MatchAlgorithm { Pf, MarginalFixedLag, Online, OnlineBsi, FfbsiOffline, Viterbi };

inline MatchAlgorithm parse_algorithm(const std::string& name) {
    if (name == "pf") return MatchAlgorithm::Pf;
    if (name == "marginal-fixed-lag") return MatchAlgorithm::MarginalFixedLag;
    if (name == "online") return MatchAlgorithm::Online;
    if (name == "online-bsi") return MatchAlgorithm::OnlineBsi;
    if (name == "ffbsi-offline") return MatchAlgorithm::FfbsiOffline;
    if (name == "viterbi") return MatchAlgorithm::Viterbi;
    throw std::invalid_argument("unknown algorithm '" + name + "'");
}

inline std::string algorithm_name(MatchAlgorithm a) {
    switch (a) {
        case MatchAlgorithm::Pf: return "pf";
        case MatchAlgorithm::MarginalFixedLag: return "marginal-fixed-lag";
        case MatchAlgorithm::Online: return "online";
        case MatchAlgorithm::OnlineBsi: return "online-bsi";
        case MatchAlgorithm::FfbsiOffline: return "ffbsi-offline";
        case MatchAlgorithm::Viterbi: return "viterbi";
    }
    throw std::logic_error("unreachable");
}

struct MatchConfig {
    MatchAlgorithm algorithm = MatchAlgorithm::Online;
    std::size_t n_particles = 200;
    int lag = 3;
    int max_rejections = 0;
    double ess_threshold = 0.5;
    int threads = 1;
    std::uint64_t seed = 0;
    bool with_diagnostics = true;

    void validate() const {
        if (n_particles == 0) throw std::invalid_argument("n_particles must be at least 1");
        if (lag < 0) throw std::invalid_argument("lag must be nonnegative");
        if (max_rejections < 0) throw std::invalid_argument("max_rejections must be nonnegative");
        if (threads < 1) throw std::invalid_argument("threads must be at least 1");
        if (!(ess_threshold >= 0.0)) throw std::invalid_argument("ess_threshold must be >= 0");
    }
};

struct MatchResult {
    TrajectorySample<RouteState> sample;
    std::vector<MetricRow> diagnostics;  // streaming: ess per update; all: unique per step
};

// Drive a matcher from a pull source of observations. Streaming algorithms
// consume one observation per update and never ask for an earlier one; the
// offline algorithms buffer the record first.
template <typename NextFn>
MatchResult run_match(const MapMatchModel& model, NextFn&& next, const MatchConfig& cfg) {
    cfg.validate();
    MatchResult result;
    FilterOptions opt;
    opt.ess_threshold = cfg.ess_threshold;
    opt.threads = cfg.threads;
    RngStream rng(cfg.seed);

    auto ess_now = [](const TrajectorySample<RouteState>& s) {
        return s.uniform() ? static_cast<double>(s.size()) : ess(s.log_weights);
    };

    std::optional<GpsObservation> y0 = next();
    if (!y0) throw EmptySampleError("the trace holds no observations");

    switch (cfg.algorithm) {
        case MatchAlgorithm::Pf: {
            auto sample = pf_init_trajectories(model, *y0, cfg.n_particles, rng, cfg.threads);
            result.diagnostics.push_back({"ess", y0->t, ess_now(sample)});
            while (auto y = next()) {
                pf_update(model, sample, *y, opt, rng);
                result.diagnostics.push_back({"ess", y->t, ess_now(sample)});
            }
            result.sample = std::move(sample);
            break;
        }
        case MatchAlgorithm::MarginalFixedLag: {
            auto sample = pf_init_trajectories(model, *y0, cfg.n_particles, rng, cfg.threads);
            result.diagnostics.push_back({"ess", y0->t, ess_now(sample)});
            while (auto y = next()) {
                marginal_fixed_lag_update(model, sample, *y, cfg.lag, opt, rng);
                result.diagnostics.push_back({"ess", y->t, ess_now(sample)});
            }
            result.sample = std::move(sample);
            break;
        }
        case MatchAlgorithm::Online: {
            auto state = online_smoother_init(model, *y0, cfg.n_particles, rng, cfg.threads);
            result.diagnostics.push_back({"ess", y0->t, ess_now(state.trajectories)});
            while (auto y = next()) {
                online_smoother_update(model, state, *y, cfg.lag, cfg.max_rejections, opt, rng);
                result.diagnostics.push_back({"ess", y->t, ess_now(state.trajectories)});
            }
            result.sample = std::move(state.trajectories);
            break;
        }
        case MatchAlgorithm::OnlineBsi: {
            auto state = online_smoother_bsi_init(model, *y0, cfg.n_particles, rng, cfg.threads);
            result.diagnostics.push_back({"ess", y0->t, ess_now(state.trajectories)});
            while (auto y = next()) {
                online_smoother_bsi_update(model, state, *y, cfg.lag, cfg.max_rejections, opt,
                                           rng);
                result.diagnostics.push_back({"ess", y->t, ess_now(state.trajectories)});
            }
            result.sample = std::move(state.trajectories);
            break;
        }
        case MatchAlgorithm::FfbsiOffline: {
            GpsTrace trace{*y0};
            while (auto y = next()) trace.push_back(*y);
            result.sample =
                ffbsi_offline(model, trace, cfg.n_particles, cfg.max_rejections, opt, rng);
            break;
        }
        case MatchAlgorithm::Viterbi: {
            GpsTrace trace{*y0};
            while (auto y = next()) trace.push_back(*y);
            auto match = viterbi_match(model.network(), trace, model.params());
            std::vector<RouteState> traj(trace.size());
            traj[0] = stationary_state(match.positions[0], trace[0].t);
            for (std::size_t t = 1; t < trace.size(); ++t) {
                traj[t].route = match.routes[t - 1];
                traj[t].position = match.positions[t];
                traj[t].timestamp = trace[t].t;
            }
            result.sample.trajectories = {std::move(traj)};
            break;
        }
    }

    if (cfg.with_diagnostics) {
        for (std::size_t t = 0; t < result.sample.length(); ++t) {
            double ts = result.sample.trajectories[0][t].timestamp;
            result.diagnostics.push_back(
                {"unique", ts, static_cast<double>(unique_count(result.sample, t))});
        }
    }
    return result;
}

}  // namespace stitchsmc
