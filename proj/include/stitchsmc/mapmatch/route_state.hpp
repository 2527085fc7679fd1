#pragma once

#include <cstddef>
#include <vector>

#include "stitchsmc/core/errors.hpp"
#include "stitchsmc/road/geometry.hpp"
#include "stitchsmc/road/network.hpp"
#include "stitchsmc/road/routes.hpp"

namespace stitchsmc {

struct GpsObservation {
    double t = 0.0;  // seconds
    Point point;
};

using GpsTrace = std::vector<GpsObservation>;

inline void validate_trace(const GpsTrace& trace) {
    for (std::size_t i = 1; i < trace.size(); ++i)
        if (!(trace[i].t > trace[i - 1].t))
            throw SchemaError("trace timestamps must be strictly increasing");
}

// Latent state at one observation time: the edges walked since the previous
// observation and the position reached. A vehicle that did not move (and the
// start of a trajectory) carries a single-edge route of zero distance.
struct RouteState {
    Route route;
    RoadPosition position;
    double timestamp = 0.0;

    friend bool operator==(const RouteState& a, const RouteState& b) {
        return a.route.edges == b.route.edges && a.route.start_offset == b.route.start_offset &&
               a.position == b.position;
    }
};

inline RouteState stationary_state(const RoadPosition& pos, double timestamp) {
    RouteState s;
    s.route.edges = {pos.edge};
    s.route.start_offset = pos.offset;
    s.route.end_offset = pos.offset;
    s.route.road_distance = 0.0;
    s.position = pos;
    s.timestamp = timestamp;
    return s;
}

}  // namespace stitchsmc
