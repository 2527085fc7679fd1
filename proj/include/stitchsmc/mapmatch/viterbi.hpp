#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "stitchsmc/core/errors.hpp"
#include "stitchsmc/core/weighted_sample.hpp"
#include "stitchsmc/mapmatch/params.hpp"
#include "stitchsmc/mapmatch/route_state.hpp"
#include "stitchsmc/road/network.hpp"
#include "stitchsmc/road/routes.hpp"

namespace stitchsmc {

// Exact MAP matching over projection candidates, scored with the shortest
// road distance between consecutive candidates. Deterministic reference for
// validating the particle matchers on small networks.
struct ViterbiMatch {
    std::vector<RoadPosition> positions;
    std::vector<Route> routes;  // routes[k] joins positions[k] to positions[k + 1]
};

namespace detail {

struct NodePaths {
    std::vector<double> dist;
    std::vector<long long> pred_edge;  // edge that reaches the node, -1 at the source
};

inline NodePaths shortest_node_paths(const RoadNetwork& net, std::size_t source) {
    NodePaths out;
    out.dist.assign(net.nodes.size(), std::numeric_limits<double>::infinity());
    out.pred_edge.assign(net.nodes.size(), -1);
    out.dist[source] = 0.0;
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> frontier;
    frontier.push({0.0, source});
    while (!frontier.empty()) {
        auto [d, n] = frontier.top();
        frontier.pop();
        if (d > out.dist[n]) continue;
        for (std::size_t e : net.outgoing[n]) {
            const auto& edge = net.edges[e];
            double nd = d + edge.length;
            if (nd < out.dist[edge.to]) {
                out.dist[edge.to] = nd;
                out.pred_edge[edge.to] = static_cast<long long>(e);
                frontier.push({nd, edge.to});
            }
        }
    }
    return out;
}

// Cheapest way from `a` to `b`: straight along the shared edge when b is
// ahead of a, otherwise through the node graph. Returns false when b is
// unreachable.
inline bool connect_positions(const RoadNetwork& net, const NodePaths& paths,
                              const RoadPosition& a, const RoadPosition& b, Route& route) {
    double best = std::numeric_limits<double>::infinity();
    bool direct = false;
    if (a.edge == b.edge && b.offset >= a.offset) {
        best = b.offset - a.offset;
        direct = true;
    }
    std::size_t entry = net.edges[b.edge].from;
    double via = (net.edges[a.edge].length - a.offset) + paths.dist[entry] + b.offset;
    if (via < best) {
        best = via;
        direct = false;
    }
    if (!std::isfinite(best)) return false;

    std::vector<std::size_t> edges;
    if (direct) {
        edges = {a.edge};
    } else {
        std::vector<std::size_t> mid;
        for (std::size_t n = entry; n != net.edges[a.edge].to;) {
            long long e = paths.pred_edge[n];
            mid.push_back(static_cast<std::size_t>(e));
            n = net.edges[static_cast<std::size_t>(e)].from;
        }
        edges.push_back(a.edge);
        edges.insert(edges.end(), mid.rbegin(), mid.rend());
        edges.push_back(b.edge);
    }
    route = make_route(net, edges, a.offset, b.offset);
    return true;
}

}  // namespace detail

inline ViterbiMatch viterbi_match(const RoadNetwork& net, const GpsTrace& trace,
                                  const MapMatchParams& params) {
    params.validate();
    validate_trace(trace);
    if (trace.empty()) throw EmptySampleError("cannot match an empty trace");

    const std::size_t T = trace.size();
    double s2 = params.sigma_gps * params.sigma_gps;
    double log_2pis2 = std::log(2.0 * std::numbers::pi * s2);

    std::vector<std::vector<NearPosition>> cands(T);
    for (std::size_t t = 0; t < T; ++t) {
        cands[t] = nearest_positions(net, trace[t].point, params.r_gps());
        if (cands[t].empty())
            throw NoRoadNearbyError("no road within " + std::to_string(params.r_gps()) +
                                    " m of the observation at t=" + std::to_string(trace[t].t) +
                                    " s");
    }

    auto emission = [&](const NearPosition& c) {
        return -log_2pis2 - c.distance * c.distance / (2.0 * s2);
    };

    std::vector<std::vector<double>> score(T);
    std::vector<std::vector<std::size_t>> back(T);
    std::vector<std::vector<Route>> incoming(T);

    score[0].resize(cands[0].size());
    for (std::size_t j = 0; j < cands[0].size(); ++j) score[0][j] = emission(cands[0][j]);

    for (std::size_t t = 1; t < T; ++t) {
        double lambda_g = params.lambda_for_gap(trace[t].t - trace[t - 1].t);
        score[t].assign(cands[t].size(), neg_inf);
        back[t].assign(cands[t].size(), 0);
        incoming[t].resize(cands[t].size());
        for (std::size_t i = 0; i < cands[t - 1].size(); ++i) {
            if (score[t - 1][i] == neg_inf) continue;
            const RoadPosition& a = cands[t - 1][i].position;
            auto paths = detail::shortest_node_paths(net, net.edges[a.edge].to);
            for (std::size_t j = 0; j < cands[t].size(); ++j) {
                Route route;
                if (!detail::connect_positions(net, paths, a, cands[t][j].position, route))
                    continue;
                double d = route.road_distance;
                double lg;
                if (d <= 0.0) {
                    lg = std::log(params.p0);
                } else {
                    double straight = distance(position_coords(net, a),
                                               position_coords(net, cands[t][j].position));
                    lg = std::log((1.0 - params.p0) * lambda_g) - lambda_g * d -
                         params.beta * std::abs(d - straight);
                }
                double s = score[t - 1][i] + lg + emission(cands[t][j]);
                if (s > score[t][j]) {
                    score[t][j] = s;
                    back[t][j] = i;
                    incoming[t][j] = std::move(route);
                }
            }
        }
        bool any = std::any_of(score[t].begin(), score[t].end(),
                               [](double s) { return s != neg_inf; });
        if (!any)
            throw DisconnectedError("no road route connects the candidates at t=" +
                                    std::to_string(trace[t].t) + " s to the previous step");
    }

    ViterbiMatch out;
    out.positions.resize(T);
    out.routes.resize(T > 0 ? T - 1 : 0);
    std::size_t j = static_cast<std::size_t>(
        std::max_element(score[T - 1].begin(), score[T - 1].end()) - score[T - 1].begin());
    for (std::size_t t = T; t-- > 0;) {
        out.positions[t] = cands[t][j].position;
        if (t > 0) {
            out.routes[t - 1] = incoming[t][j];
            j = back[t][j];
        }
    }
    return out;
}

}  // namespace stitchsmc
