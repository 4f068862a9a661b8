#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "hypersticks/percolation.hpp"
#include "hypersticks/stickproc.hpp"

using namespace hs;

namespace {

Stick perpendicular_at(const Stick& l, double offset, double len)
{
    const HPoint p = point_on_stick(l, offset);
    return make_stick(p, direction_at(p, l.ends.a) + kPi / 2, len);
}

}  // namespace

TEST_CASE("union-find")
{
    UnionFind uf(5);
    CHECK(uf.unite(0, 1));
    CHECK(uf.unite(3, 4));
    CHECK_FALSE(uf.unite(1, 0));
    CHECK(uf.find(0) == uf.find(1));
    CHECK(uf.find(2) != uf.find(3));
}

TEST_CASE("trivial cluster examples")
{
    CHECK(build_clusters(std::vector<Stick>{}).cluster_count == 0);
    const std::vector<Stick> s{make_stick(HPoint{}, 0, 2), make_stick(HPoint{}, kPi / 2, 2),
                               make_stick(make_point(10, 1.0), 0.3, 2)};
    const ClusterLabeling lab = build_clusters(s);
    CHECK(lab.cluster_count == 2);
    CHECK(lab.label[0] == lab.label[1]);
    CHECK(lab.label[2] != lab.label[0]);
}

TEST_CASE("indexed clustering equals brute force")
{
    // ~500 sticks per trial in B(o, 4)
    int identical = 0;
    for (std::uint64_t r = 0; r < 100; ++r) {
        const StickSample s = sample_window({3.0, 2.0, 3.0, 2024}, r);
        const ClusterLabeling a = build_clusters(s), b = build_clusters_bruteforce(s);
        const bool same = a.label == b.label && a.cluster_count == b.cluster_count;
        identical += same;
        CHECK(two_arm_count(s, a, 1.0, 3.0) == two_arm_count(s, b, 1.0, 3.0));
    }
    CHECK(identical == 100);

    // long sticks and a sparse far-out region
    for (std::uint64_t r = 0; r < 10; ++r) {
        const StickSample s = sample_window({0.05, 6.0, 5.0, 3}, r);
        CHECK(build_clusters(s).label == build_clusters_bruteforce(s).label);
    }
}

TEST_CASE("crossing and two-arm examples")
{
    const ClusterLabeling empty = build_clusters(std::vector<Stick>{});
    CHECK_FALSE(crossing_exists(std::vector<Stick>{}, empty, 1, 4));
    CHECK(two_arm_count(std::vector<Stick>{}, empty, 1, 4) == 0);

    const double R = 4;
    const std::vector<Stick> one{make_stick(HPoint{}, 0.7, 2 * R)};
    const ClusterLabeling lab = build_clusters(one);
    CHECK(crossing_exists(one, lab, 1, R));
    CHECK(two_arm_count(one, lab, 1, R) == 1);

    // a short stick near o never reaches R
    const std::vector<Stick> inner{make_stick(HPoint{}, 0.7, 2)};
    CHECK_FALSE(crossing_exists(inner, build_clusters(inner), 1, R));

    // two disjoint radial arms
    const std::vector<Stick> two{make_stick(make_point(2.9, 0), 0, 4), make_stick(make_point(2.9, kPi), 0, 4)};
    const ClusterLabeling l2 = build_clusters(two);
    CHECK(l2.cluster_count == 2);
    CHECK(two_arm_count(two, l2, 1, R) == 2);
}

TEST_CASE("two_arm_count bounds and crossing equivalence")
{
    for (std::uint64_t r = 0; r < 40; ++r) {
        const StickSample s = sample_window({0.15, 3.0, 4.0, 8}, r, true);
        const ClusterLabeling lab = build_clusters(s);
        const std::size_t n = two_arm_count(s, lab, 1.0, 4.0);
        CHECK(n <= lab.cluster_count);
        CHECK(crossing_exists(s, lab, 1.0, 4.0) == (n >= 1));
    }
}

TEST_CASE("crossing is monotone under sample union")
{
    std::size_t lo_cross = 0, hi_cross = 0;
    for (std::uint64_t r = 0; r < 60; ++r) {
        const StickSample lo = sample_window({0.08, 3.0, 4.0, 17}, r, true);
        const StickSample extra = sample_window({0.08, 3.0, 4.0, 18}, r, true);
        std::vector<Stick> u = lo.sticks;
        u.insert(u.end(), extra.sticks.begin(), extra.sticks.end());
        const bool a = crossing_exists(lo, build_clusters(lo), 1.0, 4.0);
        const bool b = crossing_exists(u, build_clusters(u), 1.0, 4.0);
        CHECK((!a || b));
        lo_cross += a;
        hi_cross += b;
    }
    CHECK(lo_cross <= hi_cross);
}

TEST_CASE("labeling export")
{
    const std::vector<Stick> s{make_stick(HPoint{}, 0, 2), make_stick(make_point(9, 0), 0, 2),
                               make_stick(HPoint{}, 1, 2)};
    std::ostringstream os;
    write_labeling(os, build_clusters(s));
    CHECK(os.str() == "stick_index,cluster_id\n0,0\n1,1\n2,0\n");
}

TEST_CASE("blocking indicator")
{
    const double L = 8;
    const int k = 2;
    CHECK_FALSE(blocking_indicator({}, build_clusters(std::vector<Stick>{}), k, L, 5));

    const Stick l = stick_from_triple({k + 0.5, kPi / 2, 0}, L, 0);
    REQUIRE(in_block_class(l, k, L));
    CHECK_FALSE(in_block_class(l, k + 1, L));
    // perpendiculars beyond the cut points lie wholly in the two half-planes
    const Stick up = perpendicular_at(l, 0.44 * L, 12), down = perpendicular_at(l, -0.44 * L, 12);
    const std::vector<Stick> cross{l, up, down};
    const ClusterLabeling lab = build_clusters(cross);
    REQUIRE(lab.cluster_count == 1);
    CHECK(blocking_indicator(cross, lab, k, L, 5));
    CHECK_FALSE(blocking_indicator(cross, lab, k, L, 20));
    CHECK_FALSE(blocking_indicator(cross, lab, k + 1, L, 5));

    const std::vector<Stick> half{l, up};
    CHECK_FALSE(blocking_indicator(half, build_clusters(half), k, L, 5));
}

TEST_CASE("class stick presence probability")
{
    const double L = 8, lam = 5 * std::sqrt(2.0) * kPi / L;
    CHECK(mu_box({2, 3, kPi / 4, 3 * kPi / 4, -L / 4, L / 4}) * lam == doctest::Approx(5.0).epsilon(1e-12));
    int present = 0;
    const int reps = 600;
    for (int r = 0; r < reps; ++r) {
        const StickSample s = sample_restricted({lam, L, 3.0, 41}, 3.0, 0.0, r);
        bool any = false;
        for (const auto& st : s.sticks) any = any || in_block_class(st, 2, L);
        present += any;
    }
    const double p = 1 - std::exp(-5.0), f = double(present) / reps;
    CHECK(std::fabs(f - p) <= 3 * std::sqrt(p * (1 - p) / reps) + 1.0 / reps);
}

TEST_CASE("H_k disjointness check")
{
    const double L = 40;
    const int k = 2;
    const Stick lk = stick_from_triple({k + 0.5, kPi / 2, 0}, L, 0);
    const Stick lk4 = stick_from_triple({k + 4.5, kPi / 2, 0}, L, 0);
    const HkCheck c = hk_disjointness_check(lk, lk4, L);
    CHECK(c.ok);
    CHECK(c.upper_k);
    CHECK(c.upper_k4);
    CHECK(c.disjoint);
    CHECK(std::fabs(c.beta_k) <= std::asin(2 / (std::sin(kPi / 5) * std::cosh(3.0))));
    CHECK(std::asin(2 / (std::sin(kPi / 5) * std::cosh(3.0))) <= kPi / 9);
    CHECK(std::fabs(c.alpha_k) <= 2 * std::exp(-L / 8));

    // across the class box the verdict holds
    std::mt19937_64 g(6);
    std::uniform_real_distribution<double> U(0, 1);
    for (int i = 0; i < 200; ++i) {
        const Stick a = stick_from_triple({k + U(g), kPi / 4 + kPi / 2 * U(g), (U(g) - 0.5) * L / 2}, L, 0);
        const Stick b = stick_from_triple({k + 4 + U(g), kPi / 4 + kPi / 2 * U(g), (U(g) - 0.5) * L / 2}, L, 0);
        CHECK(hk_disjointness_check(a, b, L).ok);
    }
}

TEST_CASE("rooted cluster")
{
    const double L = 1;
    CHECK(rooted_cluster(0.0, L, 1, 0).size == 1);
    CHECK(rooted_cluster(1e-9, L, 1, 0).size == 1);

    // the root has Poisson(m) direct neighbours, so P(size = 1) = e^{-m}
    const double m = 0.5, lam = m * kPi / (2 * L * L);
    CHECK(offspring_mean(lam, L) == doctest::Approx(m));
    const int reps = 3000;
    int alone = 0;
    for (int r = 0; r < reps; ++r) alone += rooted_cluster(lam, L, 5, r).size == 1;
    const double p = std::exp(-m);
    CHECK(std::fabs(double(alone) / reps - p) < 3 * std::sqrt(p * (1 - p) / reps));

    const SubcriticalStats st = subcritical_cluster_stats(lam, L, 2000, 3, 30.0, 2);
    CHECK(st.gw_bound == doctest::Approx(2.0));
    CHECK(st.mean_size <= st.gw_bound + 3 * st.stderr_size);
    CHECK(st.truncated == 0);
    CHECK_THROWS(subcritical_cluster_stats(2 * kPi / (2 * L * L), L, 10, 1));
}
