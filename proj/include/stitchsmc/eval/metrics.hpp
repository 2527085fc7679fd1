#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "stitchsmc/core/errors.hpp"
#include "stitchsmc/core/weighted_sample.hpp"
#include "stitchsmc/mapmatch/route_state.hpp"

namespace stitchsmc {

// Total variation between the binned empirical laws of two scalar samples.
inline double binned_tv(const std::vector<double>& a, const std::vector<double>& b,
                        double bin_width) {
    if (!(bin_width > 0.0)) throw std::invalid_argument("bin_width must be positive");
    if (a.empty() || b.empty()) throw EmptySampleError("binned_tv needs non-empty samples");
    std::map<long long, std::pair<long long, long long>> counts;
    for (double x : a) counts[static_cast<long long>(std::floor(x / bin_width))].first += 1;
    for (double x : b) counts[static_cast<long long>(std::floor(x / bin_width))].second += 1;
    double na = static_cast<double>(a.size());
    double nb = static_cast<double>(b.size());
    double tv = 0.0;
    for (const auto& [bin, c] : counts)
        tv += std::abs(static_cast<double>(c.first) / na - static_cast<double>(c.second) / nb);
    return tv / 2.0;
}

// Road distance travelled over the block (from, to] of one trajectory.
inline double block_distance(const std::vector<RouteState>& traj, std::size_t from,
                             std::size_t to) {
    if (from > to || to >= traj.size())
        throw std::invalid_argument("block range must satisfy from <= to < length");
    double d = 0.0;
    for (std::size_t t = from + 1; t <= to; ++t) d += traj[t].route.road_distance;
    return d;
}

// Number of distinct values surviving at coordinate t of the trajectory
// sample; quadratic scan, adequate for diagnostic use.
template <typename State>
std::size_t unique_count(const std::vector<std::vector<State>>& trajectories, std::size_t t) {
    if (trajectories.empty()) throw EmptySampleError("unique_count needs a non-empty sample");
    std::size_t n_unique = 0;
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        if (t >= trajectories[i].size())
            throw std::invalid_argument("coordinate index beyond trajectory length");
        bool seen = false;
        for (std::size_t j = 0; j < i && !seen; ++j)
            seen = trajectories[i][t] == trajectories[j][t];
        if (!seen) ++n_unique;
    }
    return n_unique;
}

template <typename State>
std::size_t unique_count(const TrajectorySample<State>& sample, std::size_t t) {
    return unique_count(sample.trajectories, t);
}

struct MetricRow {
    std::string metric;
    double t = 0.0;
    double value = 0.0;
};

inline void write_metric_csv(std::ostream& out, const std::vector<MetricRow>& rows) {
    out << "metric,t,value\n";
    out.precision(17);
    for (const auto& row : rows) out << row.metric << ',' << row.t << ',' << row.value << '\n';
}

}  // namespace stitchsmc
