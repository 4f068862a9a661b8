// Connectivity of stick sets: clusters, crossing and two-arm events, blocking.
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "hypersticks/hypgeo.hpp"
#include "hypersticks/stickproc.hpp"

namespace hs {

class UnionFind {
public:
    explicit UnionFind(std::size_t n = 0);
    std::uint32_t find(std::uint32_t i);
    bool unite(std::uint32_t a, std::uint32_t b);
    std::size_t size() const { return parent_.size(); }

    std::vector<std::uint32_t> parent_;
    std::vector<std::uint8_t> rank_;
};

struct ClusterLabeling {
    std::vector<std::uint32_t> parent;
    std::vector<std::uint8_t> rank;
    // Compact cluster id per stick, numbered by first appearance in stick order.
    std::vector<std::uint32_t> label;
    std::size_t cluster_count = 0;
    // Pairs passed to the precise fallback test (diagnostic).
    std::size_t fallback_tests = 0;
};

ClusterLabeling build_clusters(const std::vector<Stick>& sticks);
inline ClusterLabeling build_clusters(const StickSample& s) { return build_clusters(s.sticks); }
ClusterLabeling build_clusters_bruteforce(const std::vector<Stick>& sticks);
inline ClusterLabeling build_clusters_bruteforce(const StickSample& s) { return build_clusters_bruteforce(s.sticks); }

// Number of clusters holding both a stick meeting B(o, r_in) and a stick with a
// point at distance >= R.
std::size_t two_arm_count(const std::vector<Stick>& sticks, const ClusterLabeling& lab, double r_in, double R);
bool crossing_exists(const std::vector<Stick>& sticks, const ClusterLabeling& lab, double r_in, double R);
inline std::size_t two_arm_count(const StickSample& s, const ClusterLabeling& lab, double r_in, double R)
{
    return two_arm_count(s.sticks, lab, r_in, R);
}
inline bool crossing_exists(const StickSample& s, const ClusterLabeling& lab, double r_in, double R)
{
    return crossing_exists(s.sticks, lab, r_in, R);
}

void write_labeling(std::ostream& os, const ClusterLabeling& lab);

// --- blocking sticks around the positive horizontal axis ---

// Stick hitting the ray at angle 0 with triple in [k, k+1] x [pi/4, 3pi/4] x [-L/4, L/4].
bool in_block_class(const Stick& s, int k, double L);
// Half-plane cut off by the perpendicular at the point L/8 from the end of s lying
// in the upper (upper = true) or lower half-plane; it does not contain o.
HalfPlane block_halfplane(const Stick& s, bool upper);

// Finite-depth proxy for X_k: some class stick l has, on both sides, a chain of
// sticks lying inside that side's half-plane, connected to l, reaching distance
// depth_radius from l's centre.
bool blocking_indicator(const std::vector<Stick>& sticks, const ClusterLabeling& lab, int k, double L,
                        double depth_radius);

struct HkCheck {
    bool ok = false;
    bool upper_k = false;     // H_k^+ inside the upper half-plane
    bool upper_k4 = false;    // H_{k+4}^+ inside the upper half-plane
    bool disjoint = false;    // H_k^+ and H_{k+4}^+ disjoint
    double alpha_k = 0.0;     // angle at the hit point between x_k^+ and the first end of g_k^+
    double beta_k = 0.0;      // angle at the hit point of l_k towards the second end of g_{k+4}^+
    Arc arc_k, arc_k4;
};
HkCheck hk_disjointness_check(const Stick& lk, const Stick& lk4, double L);

// --- subcritical domination ---

struct RootedCluster {
    std::size_t size = 1;        // sticks in the cluster, root included
    double reach = 0.0;          // largest distance from o over cluster points
    bool truncated = false;
};

// Cluster of l_L(o, 0) in an independent Poisson stick process generated lazily
// cell by cell, so the window grows with the cluster. Exploration stops (truncated)
// once a cluster stick reaches max_radius or the cluster exceeds max_size.
RootedCluster rooted_cluster(double lambda, double L, std::uint64_t seed, std::uint64_t replicate,
                             double max_radius = 30.0, std::size_t max_size = 1000000);

struct SubcriticalStats {
    double lambda = 0.0, L = 0.0, m = 0.0;
    std::size_t reps = 0;
    double mean_size = 0.0, stderr_size = 0.0;
    double gw_bound = 0.0;  // 1 / (1 - m)
    std::size_t truncated = 0;
    std::size_t max_size = 0;
    double mean_reach = 0.0;
};

SubcriticalStats subcritical_cluster_stats(double lambda, double L, std::size_t n_reps, std::uint64_t seed,
                                           double max_radius = 30.0, unsigned threads = 1);

}  // namespace hs
