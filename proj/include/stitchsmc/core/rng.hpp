#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace stitchsmc {

// Random stream addressed by (seed, stream). The same pair with the same call
// sequence reproduces the same draws on any platform; distinct stream ids act
// as independent streams. Construction is cheap (a few dozen integer ops), so
// per-particle streams can be created freely inside updates.
//
// Engine: xoshiro256++ with splitmix64 state initialisation. Distributions
// are implemented here rather than taken from <random>, whose distribution
// objects are not reproducible across standard libraries.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed), stream_(stream) {
        std::uint64_t sm = seed ^ mix(stream + 0x632be59bd9b4e019ull);
        s_[0] = splitmix(sm);
        s_[1] = splitmix(sm);
        s_[2] = splitmix(sm);
        s_[3] = splitmix(sm);
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    // Stream for a sub-task (a per-particle draw, a nested update). A pure
    // function of (seed, stream, key): independent of how far this stream has
    // already been consumed, so parallel and serial schedules agree.
    RngStream substream(std::uint64_t key) const {
        return RngStream(seed_, mix(stream_ + 0x9e3779b97f4a7c15ull * (key + 1)));
    }

    std::uint64_t next_u64() {
        std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1]; safe to pass to log.
    double uniform_pos() { return 1.0 - uniform(); }

    // Uniform integer in [0, n), n >= 1. Multiply-shift; bias is < 2^-64.
    std::uint64_t uniform_int(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Standard normal (Box-Muller; the second draw of each pair is cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double radius = std::sqrt(2.0 * exponential());
        double angle = 2.0 * std::numbers::pi * uniform();
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    // Exponential with unit rate.
    double exponential() { return -std::log(uniform_pos()); }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 33)) * 0xff51afd7ed558ccdull;
        z = (z ^ (z >> 33)) * 0xc4ceb9fe1a85ec53ull;
        return z ^ (z >> 33);
    }

    static std::uint64_t splitmix(std::uint64_t& state) {
        state += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace stitchsmc
