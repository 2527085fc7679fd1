#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "stitchsmc/core/rng.hpp"
#include "support/stats.hpp"

using stitchsmc::RngStream;

TEST_CASE("identical seed and stream reproduce identical draws") {
    RngStream a(42, 7);
    RngStream b(42, 7);
    for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());
    RngStream c(42, 7), d(42, 7);
    for (int i = 0; i < 100; ++i) {
        REQUIRE(c.uniform() == d.uniform());
        REQUIRE(c.normal() == d.normal());
    }
}

TEST_CASE("distinct streams differ") {
    RngStream a(42, 0);
    RngStream b(42, 1);
    int equal = 0;
    for (int i = 0; i < 64; ++i)
        if (a.next_u64() == b.next_u64()) ++equal;
    REQUIRE(equal == 0);
}

TEST_CASE("substream is a pure function of seed, stream, key") {
    RngStream a(9, 3);
    RngStream fresh_sub = a.substream(5);
    for (int i = 0; i < 50; ++i) a.next_u64();  // consume the parent
    RngStream late_sub = a.substream(5);
    for (int i = 0; i < 20; ++i) REQUIRE(fresh_sub.next_u64() == late_sub.next_u64());

    RngStream other = a.substream(6);
    REQUIRE(other.next_u64() != a.substream(5).next_u64());
}

TEST_CASE("uniform stays in [0,1) and uniform_pos in (0,1]") {
    RngStream rng(1);
    for (int i = 0; i < 10000; ++i) {
        double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        double v = rng.uniform_pos();
        REQUIRE(v > 0.0);
        REQUIRE(v <= 1.0);
    }
}

TEST_CASE("uniform_int covers its range uniformly") {
    RngStream rng(3);
    std::vector<double> counts(7, 0.0);
    const int n = 70000;
    for (int i = 0; i < n; ++i) {
        auto v = rng.uniform_int(7);
        REQUIRE(v < 7);
        counts[v] += 1.0;
    }
    std::vector<double> probs(7, 1.0 / 7.0);
    REQUIRE(teststats::chi2_gof_p(counts, probs) > 0.01);
}

TEST_CASE("moment sanity for the continuous draws") {
    RngStream rng(12345);
    const int n = 200000;
    double su = 0.0, sn = 0.0, sn2 = 0.0, se = 0.0;
    for (int i = 0; i < n; ++i) {
        su += rng.uniform();
        double z = rng.normal();
        sn += z;
        sn2 += z * z;
        se += rng.exponential();
    }
    REQUIRE(su / n == Catch::Approx(0.5).margin(0.005));
    REQUIRE(sn / n == Catch::Approx(0.0).margin(0.01));
    REQUIRE(sn2 / n == Catch::Approx(1.0).margin(0.02));
    REQUIRE(se / n == Catch::Approx(1.0).margin(0.01));
}
