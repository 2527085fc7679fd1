#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace stitchsmc {

struct BenchRow {
    std::size_t n_particles = 0;
    int max_rejections = 0;
    double mean_s = 0.0;
    double sd_s = 0.0;
};

// Aggregate per-update wall times over seeds for every (n, rejections) pair.
// `run` returns one duration per filter update; the first update of each run
// is discarded as warmup and the rest are pooled across seeds.
inline std::vector<BenchRow> bench_update(
    const std::function<std::vector<double>(std::size_t, int, std::uint64_t)>& run,
    const std::vector<std::size_t>& ns, const std::vector<int>& rejections,
    std::size_t n_seeds) {
    if (ns.empty() || rejections.empty()) throw std::invalid_argument("nothing to benchmark");
    if (n_seeds == 0) throw std::invalid_argument("need at least one seed");

    std::vector<BenchRow> rows;
    for (std::size_t n : ns) {
        for (int r : rejections) {
            std::vector<double> pooled;
            for (std::uint64_t seed = 0; seed < n_seeds; ++seed) {
                auto times = run(n, r, seed);
                if (times.size() < 2)
                    throw std::invalid_argument("each run must time at least two updates");
                pooled.insert(pooled.end(), times.begin() + 1, times.end());
            }
            double mean = 0.0;
            for (double t : pooled) mean += t;
            mean /= static_cast<double>(pooled.size());
            double var = 0.0;
            for (double t : pooled) var += (t - mean) * (t - mean);
            var /= static_cast<double>(pooled.size());
            rows.push_back({n, r, mean, std::sqrt(var)});
        }
    }
    return rows;
}

inline void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
    out << "n,r,mean_s,sd_s\n";
    out.precision(17);
    for (const auto& row : rows)
        out << row.n_particles << ',' << row.max_rejections << ',' << row.mean_s << ','
            << row.sd_s << '\n';
}

}  // namespace stitchsmc
