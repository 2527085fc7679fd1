#pragma once

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "stitchsmc/core/errors.hpp"
#include "stitchsmc/core/rng.hpp"
#include "stitchsmc/mapmatch/model.hpp"
#include "stitchsmc/mapmatch/route_state.hpp"
#include "stitchsmc/mapmatch/trace.hpp"

namespace stitchsmc {

struct SynthResult {
    std::vector<RouteState> states;
    GpsTrace trace;
};

// Simulate a trajectory from the model prior at the reference cadence and
// observe it through Gaussian noise. A run that strands on a dead end is
// restarted from a fresh start point, a bounded number of times.
inline SynthResult synth_route(const MapMatchModel& model, std::size_t n_obs, RngStream& rng) {
    if (n_obs == 0) throw std::invalid_argument("n_obs must be positive");
    const auto& net = model.network();
    const auto& params = model.params();

    std::vector<RoadPosition> lattice;
    for (std::size_t e = 0; e < net.edges.size(); ++e) {
        for (long long k = 0;; ++k) {
            double off = static_cast<double>(k) * params.resolution;
            if (off > net.edges[e].length + 1e-9) break;
            lattice.push_back({e, std::min(off, net.edges[e].length)});
        }
    }

    const int max_attempts = 20;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        std::vector<RouteState> states;
        states.reserve(n_obs);
        states.push_back(stationary_state(lattice[rng.uniform_int(lattice.size())], 0.0));
        bool stranded = false;
        for (std::size_t k = 1; k < n_obs; ++k) {
            try {
                states.push_back(model.prior_sample(states.back(),
                                                    static_cast<double>(k) *
                                                        params.gap_reference_seconds,
                                                    rng));
            } catch (const DeadEndError&) {
                stranded = true;
                break;
            }
        }
        if (stranded) continue;

        GpsTrace trace;
        trace.reserve(n_obs);
        for (const auto& s : states) {
            Point p = position_coords(net, s.position);
            trace.push_back({s.timestamp, {p.x + params.sigma_gps * rng.normal(),
                                           p.y + params.sigma_gps * rng.normal()}});
        }
        return {std::move(states), std::move(trace)};
    }
    throw DeadEndError("simulation stranded on a dead end " + std::to_string(max_attempts) +
                       " times; the network may have no escape routes");
}

}  // namespace stitchsmc
