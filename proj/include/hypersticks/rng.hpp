// Counter-based random streams (Philox4x32-10) keyed by seed, replicate and role.
#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace hs {

enum class Role : std::uint32_t {
    window = 1,
    restricted = 2,
    gw = 3,
    cell = 4,
    test = 5,
};

std::uint64_t mix64(std::uint64_t x);

class Stream {
public:
    using result_type = std::uint64_t;

    Stream(std::uint64_t seed, std::uint64_t replicate, Role role, std::uint64_t sub = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()();

    // Uniform on [0, 1) with 53 random bits.
    double uniform();
    // Uniform on (0, 1).
    double uniform_open();

private:
    void refill();

    std::array<std::uint32_t, 2> key_{};
    std::array<std::uint32_t, 4> ctr_{};
    std::array<std::uint32_t, 4> buf_{};
    int avail_ = 0;
};

// Inverse CDF of Poisson(mean) at u. Monotone in mean for fixed u.
std::uint64_t poisson_quantile(double u, double mean);

// Fresh seed from the system entropy source.
std::uint64_t fresh_seed();

}  // namespace hs
