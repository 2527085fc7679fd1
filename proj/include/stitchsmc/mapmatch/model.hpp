#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <shared_mutex>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "stitchsmc/core/errors.hpp"
#include "stitchsmc/core/resample.hpp"
#include "stitchsmc/core/rng.hpp"
#include "stitchsmc/core/weighted_sample.hpp"
#include "stitchsmc/mapmatch/params.hpp"
#include "stitchsmc/mapmatch/route_state.hpp"
#include "stitchsmc/road/network.hpp"
#include "stitchsmc/road/routes.hpp"

namespace stitchsmc {

// Road-constrained state-space model: mixed stationary-atom/exponential prior
// on the distance travelled per step, a winding penalty against indirect
// routes, and isotropic Gaussian observation noise. Transition normalisers
// are Riemann sums over the route enumeration, cached per lattice cell.
//
// All candidate generation happens on the quantised lattice of the start
// cell; sampled states keep the particle's exact start offset with the road
// distance recomputed, so trajectories are exactly continuous.
class MapMatchModel {
public:
    using State = RouteState;
    using Observation = GpsObservation;

    MapMatchModel(const RoadNetwork& net, MapMatchParams params)
        : net_(&net), params_(validated(std::move(params))),
          routes_(net, params_.d_max, params_.resolution) {}

    MapMatchModel(const MapMatchModel&) = delete;
    MapMatchModel& operator=(const MapMatchModel&) = delete;

    const RoadNetwork& network() const { return *net_; }
    const MapMatchParams& params() const { return params_; }
    const RouteCache& route_cache() const { return routes_; }

    State initial_sample(const Observation& y, RngStream& rng) const {
        return stationary_state(sample_initial_position(y, rng), y.t);
    }

    // Truncated-Gaussian restriction to the road, up to normalisation.
    double initial_log_density(const State& x, const Observation& y) const {
        double r = distance(position_coords(*net_, x.position), y.point);
        if (r >= params_.r_gps()) return neg_inf;
        return -r * r / (2.0 * params_.sigma_gps * params_.sigma_gps);
    }

    double observation_log_density(const State& x, const Observation& y) const {
        double s2 = params_.sigma_gps * params_.sigma_gps;
        double r = distance(position_coords(*net_, x.position), y.point);
        return -std::log(2.0 * std::numbers::pi * s2) - r * r / (2.0 * s2);
    }

    double transition_log_density(const State& prev, const State& next) const {
        double kernel = rejection_log_kernel(prev, next);
        if (kernel == neg_inf) return neg_inf;
        double lz = log_normaliser(prev.position, next.timestamp - prev.timestamp);
        return lz == neg_inf ? neg_inf : kernel - lz;
    }

    std::optional<double> transition_log_bound() const {
        return std::log(mm_rejection_bound(params_));
    }

    // Unnormalised transition of `next` re-based onto `prev`: zero unless the
    // route starts on prev's edge with a nonnegative road distance inside the
    // truncated horizon (one lattice step of slack for stitched tails).
    double rejection_log_kernel(const State& prev, const State& next) const {
        const auto& edges = next.route.edges;
        if (edges.empty() || edges.front() != prev.position.edge) return neg_inf;
        double d = route_distance(*net_, edges, prev.position.offset, next.route.end_offset);
        if (d < -kTol || d > params_.d_max + params_.resolution + kTol) return neg_inf;
        double lambda_g = params_.lambda_for_gap(next.timestamp - prev.timestamp);
        if (d <= kTol) return std::log(params_.p0);
        double straight =
            distance(position_coords(*net_, prev.position), position_coords(*net_, next.position));
        return std::log((1.0 - params_.p0) * lambda_g) - lambda_g * d -
               params_.beta * std::abs(d - straight);
    }

    State rebase_onto(const State& prev, const State& next) const {
        State out = next;
        out.route.start_offset = prev.position.offset;
        out.route.road_distance =
            route_distance(*net_, out.route.edges, out.route.start_offset, out.route.end_offset);
        return out;
    }

    std::pair<State, double> proposal_sample_with_log_density(const State& prev,
                                                              const Observation& y,
                                                              RngStream& rng) const {
        Scan scan = scan_candidates(prev.position, y.t - prev.timestamp, &y);
        std::size_t pick = pick_candidate(scan, y, rng);
        return {build_state(prev, scan, pick, y.t), std::log(scan.masses[pick] / scan.total)};
    }

    State proposal_sample(const State& prev, const Observation& y, RngStream& rng) const {
        return proposal_sample_with_log_density(prev, y, rng).first;
    }

    double proposal_log_density(const State& prev, const State& next, const Observation& y) const {
        Scan scan = scan_candidates(prev.position, y.t - prev.timestamp, &y);
        if (!(scan.total > 0.0)) return neg_inf;
        double mass = match_mass(prev, scan, next);
        return mass > 0.0 ? std::log(mass / scan.total) : neg_inf;
    }

    // Draw from the discretised law proportional to transition times
    // likelihood; the returned weight estimates p(y | prev) as the candidate
    // mass sum over the transition normaliser.
    std::pair<State, double> optimal_proposal(const State& prev, const Observation& y,
                                              RngStream& rng) const {
        Scan scan = scan_candidates(prev.position, y.t - prev.timestamp, &y);
        std::size_t pick = pick_candidate(scan, y, rng);
        return {build_state(prev, scan, pick, y.t), scan.total / scan.normaliser};
    }

    // Draw the next state from the discretised transition prior.
    State prior_sample(const State& prev, double t, RngStream& rng) const {
        Scan scan = scan_candidates(prev.position, t - prev.timestamp, nullptr);
        if (!(scan.total > 0.0))
            throw DeadEndError("no route leaves edge '" + net_->edges[prev.position.edge].id +
                               "' at offset " + std::to_string(prev.position.offset));
        return build_state(prev, scan, sample_categorical(scan.masses, scan.total, rng), t);
    }

    // Z at the lattice cell of `prev`, cached per (cell, gap).
    double transition_normaliser(const RoadPosition& prev, double gap_seconds = 0.0) const {
        return std::exp(log_normaliser(prev, gap_seconds));
    }

    RoadPosition sample_initial_position(const Observation& y, RngStream& rng) const {
        double r_max = params_.r_gps();
        double s2 = params_.sigma_gps * params_.sigma_gps;
        std::vector<double> masses;
        std::vector<RoadPosition> points;
        double total = 0.0;
        for (std::size_t e = 0; e < net_->edges.size(); ++e) {
            const auto& edge = net_->edges[e];
            for (long long k = 0;; ++k) {
                double off = static_cast<double>(k) * params_.resolution;
                if (off > edge.length + kTol) break;
                off = std::min(off, edge.length);
                double r = distance(point_at_arc_length(edge.geometry, edge.cum, off), y.point);
                if (r < r_max) {
                    masses.push_back(std::exp(-r * r / (2.0 * s2)));
                    points.push_back({e, off});
                    total += masses.back();
                }
            }
        }
        if (points.empty() || !(total > 0.0))
            throw NoRoadNearbyError("no road within " + std::to_string(r_max) +
                                    " m of the observation at t=" + std::to_string(y.t) + " s");
        return points[sample_categorical(masses, total, rng)];
    }

private:
    static constexpr double kTol = 1e-9;

    struct Scan {
        std::shared_ptr<const RouteCache::CandidateList> walks;
        std::vector<double> masses;  // [0] is the stationary atom
        std::vector<std::pair<std::uint32_t, std::uint32_t>> where;  // walk, grid point
        double total = 0.0;
        double normaliser = 0.0;  // Z at the cell: atom + Riemann sum, no likelihood
    };

    static MapMatchParams validated(MapMatchParams p) {
        p.validate();
        return p;
    }

    // Enumerates the candidate set of the cell `prev` falls in. With an
    // observation, masses carry the likelihood factor for proposal sampling;
    // the normaliser accumulates without it either way.
    Scan scan_candidates(const RoadPosition& prev, double gap, const Observation* y) const {
        Scan scan;
        scan.walks = routes_.lookup(prev);
        Point origin = position_coords(*net_, routes_.cell_position(prev));
        double lambda_g = params_.lambda_for_gap(gap);
        double s2 = params_.sigma_gps * params_.sigma_gps;
        double lik_scale = 1.0 / (2.0 * std::numbers::pi * s2);
        auto lik = [&](const Point& p) {
            if (!y) return 1.0;
            double dx = p.x - y->point.x, dy = p.y - y->point.y;
            return lik_scale * std::exp(-(dx * dx + dy * dy) / (2.0 * s2));
        };

        scan.masses.push_back(params_.p0 * lik(origin));
        scan.where.push_back({0, 0});
        scan.total = scan.masses[0];
        scan.normaliser = params_.p0;
        double cont_scale = (1.0 - params_.p0) * lambda_g;
        for (std::uint32_t w = 0; w < scan.walks->size(); ++w) {
            const auto& walk = (*scan.walks)[w];
            for (std::uint32_t k = 0; k < walk.end_offsets.size(); ++k) {
                double d = walk.base_distance + walk.end_offsets[k];
                double straight = distance(walk.end_coords[k], origin);
                double unnorm = cont_scale * std::exp(-lambda_g * d -
                                                      params_.beta * std::abs(d - straight));
                scan.normaliser += unnorm * params_.resolution;
                double mass = unnorm * params_.resolution * lik(walk.end_coords[k]);
                scan.masses.push_back(mass);
                scan.where.push_back({w, k});
                scan.total += mass;
            }
        }
        remember_normaliser(prev, gap, scan.normaliser);
        return scan;
    }

    std::size_t pick_candidate(const Scan& scan, const Observation& y, RngStream& rng) const {
        if (!(scan.total > 0.0))
            throw AllWeightsZeroError("no candidate route reaches the observation at t=" +
                                      std::to_string(y.t) +
                                      " s; d_max too small or the observation is an outlier");
        return sample_categorical(scan.masses, scan.total, rng);
    }

    State build_state(const State& prev, const Scan& scan, std::size_t pick, double t) const {
        if (pick == 0) return stationary_state(prev.position, t);
        auto [w, k] = scan.where[pick];
        const auto& walk = (*scan.walks)[w];
        State s;
        s.route.edges = walk.edges;
        s.route.start_offset = prev.position.offset;
        s.route.end_offset = walk.end_offsets[k];
        s.route.road_distance =
            route_distance(*net_, s.route.edges, s.route.start_offset, s.route.end_offset);
        s.position = {walk.edges.back(), walk.end_offsets[k]};
        s.timestamp = t;
        return s;
    }

    double match_mass(const State& prev, const Scan& scan, const State& next) const {
        if (next.route.road_distance <= kTol && next.position == prev.position)
            return scan.masses[0];
        for (std::size_t i = 1; i < scan.masses.size(); ++i) {
            auto [w, k] = scan.where[i];
            const auto& walk = (*scan.walks)[w];
            if (walk.edges == next.route.edges &&
                std::abs(walk.end_offsets[k] - next.route.end_offset) < kTol)
                return scan.masses[i];
        }
        return 0.0;
    }

    using ZKey = std::tuple<std::size_t, long long, long long>;

    ZKey z_key(const RoadPosition& pos, double gap) const {
        double g = gap > 0.0 ? gap : params_.gap_reference_seconds;
        RoadPosition cell = routes_.cell_position(pos);
        return {cell.edge, routes_.quantised(cell.offset), std::llround(g * 1000.0)};
    }

    double log_normaliser(const RoadPosition& pos, double gap) const {
        ZKey key = z_key(pos, gap);
        {
            std::shared_lock<std::shared_mutex> lock(z_mu_);
            auto it = z_cache_.find(key);
            if (it != z_cache_.end()) return it->second;
        }
        Scan scan = scan_candidates(pos, gap, nullptr);  // fills the cache
        return std::log(scan.normaliser);
    }

    void remember_normaliser(const RoadPosition& pos, double gap, double z) const {
        ZKey key = z_key(pos, gap);
        {
            std::shared_lock<std::shared_mutex> lock(z_mu_);
            if (z_cache_.count(key)) return;
        }
        std::unique_lock<std::shared_mutex> lock(z_mu_);
        z_cache_.emplace(key, std::log(z));
    }

    const RoadNetwork* net_;
    MapMatchParams params_;
    mutable RouteCache routes_;
    mutable std::shared_mutex z_mu_;
    mutable std::map<ZKey, double> z_cache_;
};

// Unnormalised transition value of a candidate route taken from exactly
// x_prev, at the reference cadence.
inline double transition_unnorm(const RoadNetwork& net, const RoadPosition& x_prev,
                                const RouteState& candidate, const MapMatchParams& params) {
    const auto& route = candidate.route;
    if (route.edges.empty() || route.edges.front() != x_prev.edge ||
        std::abs(route.start_offset - x_prev.offset) > 1e-9)
        throw RouteMismatchError("candidate route does not start at the given position");
    GammaDensity g = gamma_density(route.road_distance, params);
    if (route.road_distance == 0.0) return g.atom;
    double straight =
        distance(position_coords(net, x_prev), position_coords(net, candidate.position));
    return g.density * std::exp(-params.beta * std::abs(route.road_distance - straight));
}

inline std::pair<RouteState, double> optimal_proposal_sample(const MapMatchModel& model,
                                                             const RouteState& prev,
                                                             const GpsObservation& y,
                                                             RngStream& rng) {
    return model.optimal_proposal(prev, y, rng);
}

// Ratio of the transition density of `tail` under a new head versus under the
// overlap state it was generated from; zero when the head cannot produce the
// tail at all.
inline double mm_stitch_weight(const MapMatchModel& model, const RouteState& head,
                               const RouteState& overlap, const RouteState& tail) {
    double num = model.transition_log_density(head, tail);
    if (num == neg_inf) return 0.0;
    return std::exp(num - model.transition_log_density(overlap, tail));
}

}  // namespace stitchsmc
