#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "stitchsmc/core/errors.hpp"
#include "stitchsmc/road/geometry.hpp"

namespace stitchsmc {

// Directed planar road graph. A two-way road is represented as two edges.
// Immutable after load_network; everything downstream holds it by reference.
struct RoadNetwork {
    struct Node {
        std::string id;
        Point pos;
    };

    struct Edge {
        std::string id;
        std::size_t from = 0;
        std::size_t to = 0;
        std::vector<Point> geometry;
        std::vector<double> cum;  // cumulative arc length per vertex
        double length = 0.0;
    };

    std::vector<Node> nodes;
    std::vector<Edge> edges;
    std::vector<std::vector<std::size_t>> outgoing;  // node index -> edge indices
    std::unordered_map<std::string, std::size_t> node_index;
    std::unordered_map<std::string, std::size_t> edge_index;
};

// A point on the network: edge plus arc-length offset from the edge's origin.
struct RoadPosition {
    std::size_t edge = 0;
    double offset = 0.0;

    friend bool operator==(const RoadPosition& a, const RoadPosition& b) {
        return a.edge == b.edge && a.offset == b.offset;
    }
};

inline RoadNetwork load_network(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("nodes") || !doc.contains("edges") ||
        !doc["nodes"].is_array() || !doc["edges"].is_array())
        throw SchemaError("network document needs top-level 'nodes' and 'edges' arrays");

    RoadNetwork net;
    for (const auto& jn : doc["nodes"]) {
        if (!jn.is_object() || !jn.contains("id") || !jn["id"].is_string() ||
            !jn.contains("x") || !jn["x"].is_number() || !jn.contains("y") ||
            !jn["y"].is_number())
            throw SchemaError("node entries need string 'id' and numeric 'x', 'y'");
        RoadNetwork::Node node;
        node.id = jn["id"].get<std::string>();
        node.pos = {jn["x"].get<double>(), jn["y"].get<double>()};
        if (!net.node_index.emplace(node.id, net.nodes.size()).second)
            throw SchemaError("duplicate node id '" + node.id + "'");
        net.nodes.push_back(std::move(node));
    }

    net.outgoing.resize(net.nodes.size());
    for (const auto& je : doc["edges"]) {
        if (!je.is_object() || !je.contains("id") || !je["id"].is_string() ||
            !je.contains("from") || !je["from"].is_string() || !je.contains("to") ||
            !je["to"].is_string() || !je.contains("geometry") || !je["geometry"].is_array())
            throw SchemaError("edge entries need 'id', 'from', 'to' strings and a 'geometry' list");
        RoadNetwork::Edge edge;
        edge.id = je["id"].get<std::string>();
        auto from_it = net.node_index.find(je["from"].get<std::string>());
        auto to_it = net.node_index.find(je["to"].get<std::string>());
        if (from_it == net.node_index.end() || to_it == net.node_index.end())
            throw DanglingReferenceError("edge '" + edge.id + "' references a missing node");
        edge.from = from_it->second;
        edge.to = to_it->second;

        for (const auto& jp : je["geometry"]) {
            if (!jp.is_array() || jp.size() != 2 || !jp[0].is_number() || !jp[1].is_number())
                throw SchemaError("edge '" + edge.id + "' geometry entries must be [x, y] pairs");
            edge.geometry.push_back({jp[0].get<double>(), jp[1].get<double>()});
        }
        if (edge.geometry.size() < 2)
            throw SchemaError("edge '" + edge.id + "' needs at least two geometry vertices");
        if (distance(edge.geometry.front(), net.nodes[edge.from].pos) > 1e-6 ||
            distance(edge.geometry.back(), net.nodes[edge.to].pos) > 1e-6)
            throw GeometryMismatchError("edge '" + edge.id +
                                        "' geometry endpoints do not sit on its nodes");

        edge.cum = cumulative_lengths(edge.geometry);
        edge.length = edge.cum.back();
        if (!(edge.length > 0.0))
            throw ZeroLengthEdgeError("edge '" + edge.id + "' has zero length");

        if (!net.edge_index.emplace(edge.id, net.edges.size()).second)
            throw SchemaError("duplicate edge id '" + edge.id + "'");
        net.outgoing[edge.from].push_back(net.edges.size());
        net.edges.push_back(std::move(edge));
    }
    return net;
}

inline Point position_coords(const RoadNetwork& net, const RoadPosition& pos) {
    const auto& edge = net.edges.at(pos.edge);
    if (pos.offset < 0.0 || pos.offset > edge.length + 1e-9)
        throw OffsetOutOfRangeError("offset " + std::to_string(pos.offset) + " outside edge '" +
                                    edge.id + "' of length " + std::to_string(edge.length));
    return point_at_arc_length(edge.geometry, edge.cum, std::min(pos.offset, edge.length));
}

struct NearPosition {
    RoadPosition position;
    double distance = 0.0;  // straight-line distance from the query point
};

// Closest point on every edge within `radius`, sorted by distance (ties keep
// edge order).
inline std::vector<NearPosition> nearest_positions(const RoadNetwork& net, const Point& p,
                                                   double radius) {
    std::vector<NearPosition> out;
    for (std::size_t e = 0; e < net.edges.size(); ++e) {
        auto proj = project_to_polyline(net.edges[e].geometry, net.edges[e].cum, p);
        if (proj.distance <= radius)
            out.push_back({RoadPosition{e, proj.arc_offset}, proj.distance});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const NearPosition& a, const NearPosition& b) {
                         return a.distance < b.distance;
                     });
    return out;
}

}  // namespace stitchsmc
