#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace stitchsmc {

// Map-matching model parameters. lambda is calibrated at an observation
// cadence of gap_reference_seconds; traces with other gaps rescale the rate
// per step so the expected distance stays proportional to elapsed time.
struct MapMatchParams {
    double p0 = 0.14;             // probability of staying put between observations
    double lambda = 0.07 / 15.0;  // distance prior rate, per metre
    double beta = 0.05;           // winding penalty, per metre of detour
    double sigma_gps = 5.2;       // observation noise, metres
    double r_gps_factor = 5.0;    // initial truncation radius = factor * sigma_gps
    double d_max = 525.0;         // distance horizon per step, metres
    double resolution = 1.0;      // discretisation step, metres
    double ess_threshold = 0.5;
    std::size_t lag = 3;
    std::size_t max_rejections = 0;
    double gap_reference_seconds = 15.0;
    double min_gap_seconds = 15.0;  // smallest gap the rejection bound must cover

    double r_gps() const { return r_gps_factor * sigma_gps; }

    // Rate for a step spanning `gap_seconds`; non-positive gaps (states built
    // without timestamps) fall back to the reference cadence.
    double lambda_for_gap(double gap_seconds) const {
        if (!(gap_seconds > 0.0)) return lambda;
        return lambda * gap_reference_seconds / gap_seconds;
    }

    void validate() const {
        if (!(p0 >= 0.0) || p0 >= 1.0) throw std::invalid_argument("p0 must lie in [0, 1)");
        if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
        if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
        if (!(sigma_gps > 0.0)) throw std::invalid_argument("sigma_gps must be positive");
        if (!(r_gps_factor > 0.0)) throw std::invalid_argument("r_gps_factor must be positive");
        if (!(d_max > 0.0)) throw std::invalid_argument("d_max must be positive");
        if (!(resolution > 0.0)) throw std::invalid_argument("resolution must be positive");
        if (!(ess_threshold >= 0.0)) throw std::invalid_argument("ess_threshold must be >= 0");
        if (!(gap_reference_seconds > 0.0) || !(min_gap_seconds > 0.0))
            throw std::invalid_argument("observation gaps must be positive");
    }
};

// Prior on the distance travelled between observations: a point mass at zero
// for a stationary vehicle plus an exponential density on d > 0.
struct GammaDensity {
    double atom = 0.0;     // probability mass at d == 0
    double density = 0.0;  // density per metre at d > 0
};

inline GammaDensity gamma_parts(double d, double p0, double lambda) {
    if (d < 0.0) throw std::invalid_argument("distance must be nonnegative");
    if (d == 0.0) return {p0, 0.0};
    return {0.0, (1.0 - p0) * lambda * std::exp(-lambda * d)};
}

inline GammaDensity gamma_density(double d, const MapMatchParams& params) {
    return gamma_parts(d, params.p0, params.lambda);
}

// Pointwise bound on the unnormalised transition kernel: the atom never
// exceeds p0 and the continuous part never exceeds (1-p0) * lambda, taken at
// the largest per-step rate the trace can produce.
inline double mm_rejection_bound(const MapMatchParams& params) {
    double lambda_max = params.lambda_for_gap(params.min_gap_seconds);
    return std::max((1.0 - params.p0) * lambda_max, params.p0);
}

}  // namespace stitchsmc
