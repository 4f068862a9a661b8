#include "hypersticks/rng.hpp"

#include <cmath>
#include <random>

namespace hs {

std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

Stream::Stream(std::uint64_t seed, std::uint64_t replicate, Role role, std::uint64_t sub)
{
    const std::uint64_t k =
        mix64(seed ^ mix64(sub ^ mix64(replicate ^ (static_cast<std::uint64_t>(role) << 56))));
    key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
    ctr_ = {0, 0, static_cast<std::uint32_t>(replicate), static_cast<std::uint32_t>(role)};
}

void Stream::refill()
{
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    std::array<std::uint32_t, 4> c = ctr_;
    std::uint32_t k0 = key_[0], k1 = key_[1];
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * c[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * c[2];
        c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k0, static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k1, static_cast<std::uint32_t>(p0)};
        k0 += W0;
        k1 += W1;
    }
    buf_ = c;
    avail_ = 2;
    if (++ctr_[0] == 0) ++ctr_[1];
}

Stream::result_type Stream::operator()()
{
    if (avail_ == 0) refill();
    --avail_;
    const int i = avail_ == 1 ? 0 : 2;
    return static_cast<std::uint64_t>(buf_[i]) << 32 | buf_[i + 1];
}

double Stream::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

double Stream::uniform_open()
{
    return (static_cast<double>((*this)() >> 12) + 0.5) * 0x1.0p-52;
}

std::uint64_t poisson_quantile(double u, double mean)
{
    if (!(mean > 0.0)) return 0;
    if (mean < 50.0) {
        double p = std::exp(-mean), f = p;
        std::uint64_t k = 0;
        const auto cap = static_cast<std::uint64_t>(20.0 * mean + 200.0);
        while (u > f && k < cap) {
            ++k;
            p *= mean / static_cast<double>(k);
            f += p;
        }
        return k;
    }
    // walk from the mode; the tails beyond 40 standard deviations are negligible
    const double k0 = std::floor(mean);
    const double p0 = std::exp(k0 * std::log(mean) - mean - std::lgamma(k0 + 1.0));
    double left = 0.0;
    {
        double p = p0;
        for (double k = k0; k >= 0.0 && p > 1e-300; k -= 1.0) {
            left += p;
            p *= k / mean;
        }
    }
    if (u <= left) {
        double f = left, p = p0, k = k0;
        while (k > 0.0 && u <= f - p) {
            f -= p;
            p *= k / mean;
            k -= 1.0;
        }
        return static_cast<std::uint64_t>(k);
    }
    double f = left, p = p0, k = k0;
    while (u > f && p > 1e-300) {
        k += 1.0;
        p *= mean / k;
        f += p;
    }
    return static_cast<std::uint64_t>(k);
}

std::uint64_t fresh_seed()
{
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

}  // namespace hs
