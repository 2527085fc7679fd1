#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "stitchsmc/core/errors.hpp"
#include "stitchsmc/road/network.hpp"

namespace stitchsmc {

// A connected edge walk from a start position to an end position. The first
// edge is the edge the walk originates on; road_distance is measured along
// the walk from start offset to end offset.
struct Route {
    std::vector<std::size_t> edges;
    double start_offset = 0.0;
    double end_offset = 0.0;
    double road_distance = 0.0;
};

inline double route_distance(const RoadNetwork& net, const std::vector<std::size_t>& edges,
                             double start_offset, double end_offset) {
    if (edges.size() == 1) return end_offset - start_offset;
    double d = net.edges[edges.front()].length - start_offset;
    for (std::size_t i = 1; i + 1 < edges.size(); ++i) d += net.edges[edges[i]].length;
    return d + end_offset;
}

inline Route make_route(const RoadNetwork& net, std::vector<std::size_t> edges,
                        double start_offset, double end_offset) {
    Route r;
    r.road_distance = route_distance(net, edges, start_offset, end_offset);
    r.edges = std::move(edges);
    r.start_offset = start_offset;
    r.end_offset = end_offset;
    return r;
}

inline bool route_connected(const RoadNetwork& net, const Route& r) {
    if (r.edges.empty()) return false;
    for (std::size_t i = 1; i < r.edges.size(); ++i)
        if (net.edges[r.edges[i]].from != net.edges[r.edges[i - 1]].to) return false;
    if (r.start_offset < 0.0 || r.start_offset > net.edges[r.edges.front()].length) return false;
    if (r.end_offset < 0.0 || r.end_offset > net.edges[r.edges.back()].length + 1e-9) return false;
    return true;
}

// One enumerated edge walk with its reachable end-offset grid on the final
// edge. The grid lives on a global road-distance lattice (resolution,
// 2*resolution, ...) so that the union of all walks' grid points discretises
// road distance uniformly; a walk's candidate k sits at road distance
// base_distance + end_offsets[k].
struct RouteCandidates {
    std::vector<std::size_t> edges;
    double start_offset = 0.0;
    double base_distance = 0.0;  // distance at the final edge's origin; negative for the first edge
    std::vector<double> end_offsets;
    std::vector<Point> end_coords;  // plane coordinates of each end offset
};

// Every connected edge walk from `start` whose final edge begins within
// d_max, with end-offset grid points at road-distance steps of `resolution`,
// capped at d_max. The stay-on-edge walk is always included. Cycles are
// allowed; edge lengths are positive, so d_max bounds the search.
inline std::vector<RouteCandidates> enumerate_routes(const RoadNetwork& net,
                                                     const RoadPosition& start, double d_max,
                                                     double resolution,
                                                     std::size_t max_routes = 50000) {
    if (!(d_max > 0.0) || !(resolution > 0.0))
        throw std::invalid_argument("d_max and resolution must be positive");
    const auto& start_edge = net.edges.at(start.edge);
    if (start.offset < 0.0 || start.offset > start_edge.length)
        throw OffsetOutOfRangeError("route start offset outside its edge");

    std::vector<RouteCandidates> out;
    std::deque<std::pair<std::vector<std::size_t>, double>> queue;
    queue.push_back({{start.edge}, -start.offset});

    while (!queue.empty()) {
        auto [edges, base] = std::move(queue.front());
        queue.pop_front();
        if (out.size() >= max_routes)
            throw ExplosionGuardError("route enumeration exceeded " +
                                      std::to_string(max_routes) +
                                      " walks; d_max is too large for this network");

        const auto& final_edge = net.edges[edges.back()];
        RouteCandidates cand;
        cand.edges = edges;
        cand.start_offset = start.offset;
        cand.base_distance = base;
        double d_hi = std::min(base + final_edge.length, d_max);
        long long k = std::max(1ll, static_cast<long long>(std::floor(base / resolution)) + 1);
        for (; static_cast<double>(k) * resolution <= d_hi + 1e-9; ++k) {
            double end = std::min(static_cast<double>(k) * resolution - base, final_edge.length);
            cand.end_offsets.push_back(end);
            cand.end_coords.push_back(point_at_arc_length(final_edge.geometry, final_edge.cum, end));
        }
        out.push_back(std::move(cand));

        double next_base = base + final_edge.length;
        if (next_base < d_max) {
            auto next_edges = edges;
            next_edges.push_back(0);
            for (std::size_t e : net.outgoing[final_edge.to]) {
                next_edges.back() = e;
                queue.push_back({next_edges, next_base});
            }
        }
    }
    return out;
}

// Memoised route enumeration keyed by (edge, offset quantised to the
// resolution). Lookups are safe from concurrent workers and never observe a
// partially built entry; two workers racing on a cold cell may both build it,
// the first insert wins.
class RouteCache {
public:
    using CandidateList = std::vector<RouteCandidates>;

    RouteCache(const RoadNetwork& net, double d_max, double resolution,
               std::size_t max_routes = 50000)
        : net_(&net), d_max_(d_max), resolution_(resolution), max_routes_(max_routes) {}

    double d_max() const { return d_max_; }
    double resolution() const { return resolution_; }

    long long quantised(double offset) const { return std::llround(offset / resolution_); }

    // Representative position of the cell `pos` falls in.
    RoadPosition cell_position(const RoadPosition& pos) const {
        double snapped = static_cast<double>(quantised(pos.offset)) * resolution_;
        snapped = std::min(std::max(snapped, 0.0), net_->edges[pos.edge].length);
        return {pos.edge, snapped};
    }

    std::shared_ptr<const CandidateList> lookup(const RoadPosition& pos) const {
        RoadPosition cell = cell_position(pos);
        std::uint64_t key = (static_cast<std::uint64_t>(cell.edge) << 32) |
                            static_cast<std::uint64_t>(quantised(cell.offset));
        {
            std::lock_guard<std::mutex> guard(mu_);
            auto it = cache_.find(key);
            if (it != cache_.end()) return it->second;
        }
        auto built = std::make_shared<const CandidateList>(
            enumerate_routes(*net_, cell, d_max_, resolution_, max_routes_));
        std::lock_guard<std::mutex> guard(mu_);
        return cache_.emplace(key, std::move(built)).first->second;
    }

private:
    const RoadNetwork* net_;
    double d_max_;
    double resolution_;
    std::size_t max_routes_;
    mutable std::mutex mu_;
    mutable std::unordered_map<std::uint64_t, std::shared_ptr<const CandidateList>> cache_;
};

}  // namespace stitchsmc
