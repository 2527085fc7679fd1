#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "stitchsmc/core/model.hpp"
#include "stitchsmc/core/rng.hpp"

namespace stitchsmc {

inline double log_normal_pdf(double x, double mean, double var) {
    double d = x - mean;
    return -0.5 * (d * d / var + std::log(2.0 * std::numbers::pi * var));
}

// Scalar linear-Gaussian state-space model:
//   x_0 ~ N(m0, v0),   x_t = a x_{t-1} + N(0, q),   y_t = c x_t + N(0, r).
// Closed-form filtering/smoothing below make it the continuous-state oracle.
// The proposal is the locally optimal p(x_t | x_{t-1}, y_t) by default;
// bootstrap is available for weight-formula tests.
struct LinGaussModel {
    double a = 1.0;
    double q = 1.0;
    double c = 1.0;
    double r = 1.0;
    double m0 = 0.0;
    double v0 = 1.0;
    bool bootstrap_proposal = false;

    using State = double;
    using Observation = double;

    LinGaussModel() = default;
    LinGaussModel(double a, double q, double c, double r, double m0, double v0,
                  bool bootstrap_proposal = false)
        : a(a), q(q), c(c), r(r), m0(m0), v0(v0), bootstrap_proposal(bootstrap_proposal) {
        if (!(q > 0.0) || !(r > 0.0) || !(v0 > 0.0))
            throw std::invalid_argument("variances must be positive");
    }

    std::pair<double, double> initial_posterior(double y0) const {
        double v = 1.0 / (1.0 / v0 + c * c / r);
        double m = v * (m0 / v0 + c * y0 / r);
        return {m, v};
    }

    std::pair<double, double> proposal_moments(double prev, double y) const {
        if (bootstrap_proposal) return {a * prev, q};
        double v = 1.0 / (1.0 / q + c * c / r);
        double m = v * (a * prev / q + c * y / r);
        return {m, v};
    }

    State initial_sample(Observation y0, RngStream& rng) const {
        auto [m, v] = initial_posterior(y0);
        return m + std::sqrt(v) * rng.normal();
    }
    double initial_log_density(State x0, Observation y0) const {
        auto [m, v] = initial_posterior(y0);
        return log_normal_pdf(x0, m, v);
    }
    double transition_log_density(State prev, State next) const {
        return log_normal_pdf(next, a * prev, q);
    }
    std::optional<double> transition_log_bound() const {
        return -0.5 * std::log(2.0 * std::numbers::pi * q);
    }
    State proposal_sample(State prev, Observation y, RngStream& rng) const {
        auto [m, v] = proposal_moments(prev, y);
        return m + std::sqrt(v) * rng.normal();
    }
    double proposal_log_density(State prev, State next, Observation y) const {
        auto [m, v] = proposal_moments(prev, y);
        return log_normal_pdf(next, m, v);
    }
    double observation_log_density(State x, Observation y) const {
        return log_normal_pdf(y, c * x, r);
    }
};

struct GaussianMoments {
    double mean = 0.0;
    double var = 0.0;
};

struct KalmanResult {
    std::vector<GaussianMoments> predicted;  // p(x_t | y_{0:t-1}); predicted[0] is the prior
    std::vector<GaussianMoments> filtered;   // p(x_t | y_{0:t})
};

inline KalmanResult kalman_filter(const LinGaussModel& m, const std::vector<double>& ys) {
    KalmanResult out;
    out.predicted.reserve(ys.size());
    out.filtered.reserve(ys.size());
    double pm = m.m0;
    double pv = m.v0;
    for (double y : ys) {
        out.predicted.push_back({pm, pv});
        double s = m.c * m.c * pv + m.r;
        double gain = pv * m.c / s;
        double fm = pm + gain * (y - m.c * pm);
        double fv = (1.0 - gain * m.c) * pv;
        out.filtered.push_back({fm, fv});
        pm = m.a * fm;
        pv = m.a * m.a * fv + m.q;
    }
    return out;
}

// Backward recursion over the Kalman output; smoothed marginals p(x_t | y_{0:T}).
inline std::vector<GaussianMoments> rts_smoother(const LinGaussModel& m,
                                                 const std::vector<double>& ys) {
    auto kal = kalman_filter(m, ys);
    std::vector<GaussianMoments> out(ys.size());
    if (ys.empty()) return out;
    out.back() = kal.filtered.back();
    for (std::size_t t = ys.size() - 1; t-- > 0;) {
        const auto& f = kal.filtered[t];
        const auto& p = kal.predicted[t + 1];
        double gain = f.var * m.a / p.var;
        out[t].mean = f.mean + gain * (out[t + 1].mean - p.mean);
        out[t].var = f.var + gain * gain * (out[t + 1].var - p.var);
    }
    return out;
}

}  // namespace stitchsmc
