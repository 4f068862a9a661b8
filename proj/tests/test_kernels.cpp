#include <cstring>
#include <random>

#include "doctest.h"
#include "hypersticks/kernels.hpp"
#include "oracles.hpp"

using namespace hs;

namespace {

std::vector<Stick> mixed_sticks(std::uint64_t seed, std::size_t n)
{
    std::mt19937_64 g(seed);
    std::uniform_real_distribution<double> U(0, 1);
    std::vector<Stick> s;
    for (std::size_t i = 0; i < n; ++i) {
        const int kind = static_cast<int>(i % 4);
        if (kind == 3 && !s.empty()) {
            // near-degenerate partner: collinear shift or endpoint contact
            const Stick& b = s[g() % s.size()];
            const double t = (U(g) - 0.5) * b.length * 1.5;
            const HPoint c = point_on_stick(b, std::clamp(t, -0.5 * b.length, 0.5 * b.length));
            const double phi = (g() % 2) ? b.phi + (U(g) - 0.5) * 1e-9 : kPi * U(g);
            s.push_back(make_stick(c, phi, 0.5 + 4 * U(g)));
        } else {
            s.push_back(make_stick(oracle::random_point(g, kind == 2 ? 14 : 4), kPi * U(g), 0.5 + 6 * U(g)));
        }
    }
    return s;
}

}  // namespace

TEST_CASE("scalar and AVX2 classification are bit-identical")
{
    if (!kern::avx2_available()) {
        MESSAGE("AVX2 not available on this CPU; equivalence test skipped");
        return;
    }
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto sticks = mixed_sticks(seed, 400);
        kern::StickGeom g;
        g.assign(sticks);
        std::vector<std::uint32_t> js;
        for (std::uint32_t j = 0; j < sticks.size(); ++j) js.push_back(j);
        std::vector<std::uint8_t> a(js.size()), b(js.size());
        const double tol = std::sinh(kEpsGeo);
        for (std::size_t i = 0; i < sticks.size(); ++i) {
            // odd lengths exercise the tail handling
            const std::size_t n = js.size() - (i % 5);
            kern::classify_scalar(g, i, js.data(), n, tol, a.data());
            kern::classify_avx2(g, i, js.data(), n, tol, b.data());
            REQUIRE(std::memcmp(a.data(), b.data(), n) == 0);
        }
    }
}

TEST_CASE("certain verdicts agree with the frame test")
{
    const auto sticks = mixed_sticks(9, 300);
    kern::StickGeom g;
    g.assign(sticks);
    const double tol = std::sinh(kEpsGeo);
    std::size_t unsure = 0, total = 0;
    for (std::uint32_t i = 0; i < sticks.size(); ++i) {
        std::vector<std::uint32_t> js;
        for (std::uint32_t j = i + 1; j < sticks.size(); ++j) js.push_back(j);
        std::vector<std::uint8_t> v(js.size());
        kern::classify_scalar(g, i, js.data(), js.size(), tol, v.data());
        for (std::size_t k = 0; k < js.size(); ++k) {
            ++total;
            if (v[k] == kern::kUnsure) {
                ++unsure;
                continue;
            }
            const bool frame = sticks_intersect_frame(sticks[i], sticks[js[k]]).has_value();
            INFO("pair " << i << "," << js[k]);
            CHECK((v[k] == kern::kMeet) == frame);
        }
    }
    CHECK(unsure < total / 10);
}

TEST_CASE("collinear disjoint sticks are not reported as meeting")
{
    const Stick a = make_stick(HPoint{}, 0, 2);
    const Stick b = make_stick(make_point(3.0, 0), 0, 2);
    kern::StickGeom g;
    g.push(a);
    g.push(b);
    const std::uint32_t j = 1;
    std::uint8_t v = 9;
    kern::classify_scalar(g, 0, &j, 1, std::sinh(kEpsGeo), &v);
    CHECK(v != kern::kMeet);
    CHECK_FALSE(sticks_meet(a, b));
}

TEST_CASE("dispatch selects a kernel")
{
    CHECK(kern::classify_best() != nullptr);
    const std::string name = kern::classify_best_name();
    CHECK((name == "avx2" || name == "scalar"));
}
