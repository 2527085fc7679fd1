#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "stitchsmc/core/errors.hpp"
#include "stitchsmc/core/weighted_sample.hpp"
#include "stitchsmc/mapmatch/params.hpp"
#include "stitchsmc/mapmatch/route_state.hpp"
#include "stitchsmc/road/network.hpp"
#include "stitchsmc/road/routes.hpp"

namespace stitchsmc {

inline nlohmann::json params_to_json(const MapMatchParams& p) {
    return {{"p0", p.p0},
            {"lambda", p.lambda},
            {"beta", p.beta},
            {"sigma_gps", p.sigma_gps},
            {"r_gps_factor", p.r_gps_factor},
            {"d_max", p.d_max},
            {"resolution", p.resolution},
            {"gap_reference_seconds", p.gap_reference_seconds},
            {"min_gap_seconds", p.min_gap_seconds}};
}

// Trajectory document: the sample plus enough metadata to rerun the match.
// States serialise as edge-id routes, so documents survive edge reordering.
inline nlohmann::json trajectory_document(const RoadNetwork& net,
                                          const TrajectorySample<RouteState>& sample,
                                          const MapMatchParams& params,
                                          nlohmann::json extra = nlohmann::json::object()) {
    nlohmann::json doc = std::move(extra);
    doc["format"] = "route-trajectories";
    doc["params"] = params_to_json(params);
    auto& lw = doc["log_weights"] = nlohmann::json::array();
    if (sample.uniform()) {
        for (double w : uniform_log_weights(sample.size())) lw.push_back(w);
    } else {
        for (double w : sample.log_weights) lw.push_back(w);
    }
    auto& trajs = doc["trajectories"] = nlohmann::json::array();
    for (const auto& traj : sample.trajectories) {
        nlohmann::json jt = nlohmann::json::array();
        for (const auto& s : traj) {
            nlohmann::json js;
            auto& edges = js["edges"] = nlohmann::json::array();
            for (std::size_t e : s.route.edges) edges.push_back(net.edges[e].id);
            js["start"] = s.route.start_offset;
            js["end"] = s.route.end_offset;
            js["t"] = s.timestamp;
            jt.push_back(std::move(js));
        }
        trajs.push_back(std::move(jt));
    }
    return doc;
}

inline TrajectorySample<RouteState> trajectories_from_json(const RoadNetwork& net,
                                                           const nlohmann::json& doc) {
    if (!doc.is_object() || doc.value("format", "") != std::string("route-trajectories"))
        throw SchemaError("not a route-trajectories document");
    if (!doc.contains("trajectories") || !doc["trajectories"].is_array())
        throw SchemaError("document needs a 'trajectories' array");

    TrajectorySample<RouteState> sample;
    for (const auto& jt : doc["trajectories"]) {
        if (!jt.is_array() || jt.empty())
            throw SchemaError("each trajectory must be a non-empty array of states");
        std::vector<RouteState> traj;
        for (const auto& js : jt) {
            if (!js.is_object() || !js.contains("edges") || !js["edges"].is_array() ||
                !js.contains("start") || !js["start"].is_number() || !js.contains("end") ||
                !js["end"].is_number() || !js.contains("t") || !js["t"].is_number())
                throw SchemaError("state entries need 'edges', 'start', 'end', 't'");
            std::vector<std::size_t> edges;
            for (const auto& je : js["edges"]) {
                if (!je.is_string()) throw SchemaError("route edges must be id strings");
                auto it = net.edge_index.find(je.get<std::string>());
                if (it == net.edge_index.end())
                    throw DanglingReferenceError("unknown edge '" + je.get<std::string>() +
                                                 "' in trajectory document");
                edges.push_back(it->second);
            }
            if (edges.empty()) throw SchemaError("state routes need at least one edge");
            RouteState s;
            s.route = make_route(net, edges, js["start"].get<double>(), js["end"].get<double>());
            if (!route_connected(net, s.route))
                throw SchemaError("trajectory route through '" + net.edges[edges[0]].id +
                                  "' does not connect");
            s.position = {edges.back(), s.route.end_offset};
            s.timestamp = js["t"].get<double>();
            traj.push_back(std::move(s));
        }
        if (!sample.trajectories.empty() && traj.size() != sample.trajectories[0].size())
            throw SchemaError("trajectories must share one length");
        sample.trajectories.push_back(std::move(traj));
    }
    if (sample.trajectories.empty()) throw SchemaError("document holds no trajectories");

    if (doc.contains("log_weights")) {
        if (!doc["log_weights"].is_array() ||
            doc["log_weights"].size() != sample.trajectories.size())
            throw SchemaError("'log_weights' must list one weight per trajectory");
        for (const auto& w : doc["log_weights"]) {
            if (!w.is_number()) throw SchemaError("'log_weights' entries must be numbers");
            sample.log_weights.push_back(w.get<double>());
        }
        // All-equal weights are uniform no matter how they were spelled.
        bool flat = true;
        for (double w : sample.log_weights)
            if (w != sample.log_weights.front()) flat = false;
        if (flat) sample.log_weights.clear();
    }
    return sample;
}

}  // namespace stitchsmc
