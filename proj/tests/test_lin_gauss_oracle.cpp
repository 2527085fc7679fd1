#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "stitchsmc/oracle/lin_gauss.hpp"
#include "support/stats.hpp"

using namespace stitchsmc;

TEST_CASE("near-noiseless observations pin the filter to y/c") {
    LinGaussModel m(0.9, 1.0, 2.0, 1e-12, 0.0, 1.0);
    std::vector<double> ys{1.0, -3.0, 0.5};
    auto kal = kalman_filter(m, ys);
    for (std::size_t t = 0; t < ys.size(); ++t)
        REQUIRE(kal.filtered[t].mean == Catch::Approx(ys[t] / m.c).margin(1e-6));
}

TEST_CASE("one-step hand example") {
    LinGaussModel m(1.0, 1.0, 1.0, 1.0, 0.0, 1.0);
    auto kal = kalman_filter(m, {1.0});
    REQUIRE(kal.filtered[0].mean == Catch::Approx(0.5));
    REQUIRE(kal.filtered[0].var == Catch::Approx(0.5));
}

TEST_CASE("filter marginals agree with dense joint-Gaussian conditioning") {
    LinGaussModel m(0.8, 0.5, 1.3, 0.7, 0.2, 2.0);
    std::vector<double> ys{0.4, -1.2, 2.0, 0.3, -0.7};
    for (std::size_t t = 0; t < ys.size(); ++t) {
        std::vector<double> prefix(ys.begin(), ys.begin() + static_cast<long>(t) + 1);
        auto dense = teststats::lin_gauss_dense_posterior(m, prefix);
        auto kal = kalman_filter(m, prefix);
        REQUIRE(kal.filtered[t].mean == Catch::Approx(dense.mean[t]).margin(1e-9));
        REQUIRE(kal.filtered[t].var == Catch::Approx(dense.cov[t][t]).margin(1e-9));
    }
}

TEST_CASE("smoother marginals agree with dense joint-Gaussian conditioning") {
    LinGaussModel m(0.8, 0.5, 1.3, 0.7, 0.2, 2.0);
    std::vector<double> ys{0.4, -1.2, 2.0, 0.3, -0.7};
    auto dense = teststats::lin_gauss_dense_posterior(m, ys);
    auto smooth = rts_smoother(m, ys);
    for (std::size_t t = 0; t < ys.size(); ++t) {
        REQUIRE(smooth[t].mean == Catch::Approx(dense.mean[t]).margin(1e-9));
        REQUIRE(smooth[t].var == Catch::Approx(dense.cov[t][t]).margin(1e-9));
    }
}

TEST_CASE("smoothing never inflates variance and reduces to the filter at the end") {
    LinGaussModel m(0.95, 0.3, 1.0, 1.5, 0.0, 1.0);
    std::vector<double> ys{1.0, 0.5, -0.5, 2.0, 1.0, 0.0};
    auto kal = kalman_filter(m, ys);
    auto smooth = rts_smoother(m, ys);
    for (std::size_t t = 0; t < ys.size(); ++t)
        REQUIRE(smooth[t].var <= kal.filtered[t].var + 1e-12);
    REQUIRE(smooth.back().mean == Catch::Approx(kal.filtered.back().mean));

    auto single = rts_smoother(m, {1.0});
    auto kal_single = kalman_filter(m, {1.0});
    REQUIRE(single[0].mean == Catch::Approx(kal_single.filtered[0].mean));
    REQUIRE(single[0].var == Catch::Approx(kal_single.filtered[0].var));
}

TEST_CASE("parameter validation") {
    REQUIRE_THROWS_AS(LinGaussModel(1.0, 0.0, 1.0, 1.0, 0.0, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(LinGaussModel(1.0, 1.0, 1.0, -1.0, 0.0, 1.0), std::invalid_argument);
}
