// Galton-Watson embedding of nested half-planes.
//
// Each node owns a canonical frame in which its stick is l_0 = l_L(o, 0) and its
// half-plane is H_0 = {x >= 0}. Children are searched for in a fresh restricted
// realization on the ray [L/4, L/2] of that frame.
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "hypersticks/hypgeo.hpp"

namespace hs {

struct GeometryCheckError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Orientation-preserving isometry taking the parent's canonical frame to the
// child's: q -> rotate(to_frame(center, q), -rotation).
struct NodeFrame {
    HPoint center;
    double rotation = 0.0;
};

HPoint frame_apply(const NodeFrame& f, const HPoint& q);
HPoint frame_inverse(const NodeFrame& f, const HPoint& p);

struct EmbeddingNode {
    int parent = -1;
    int depth = 0;
    int side = 0;              // +1 or -1; 0 for the root
    std::uint64_t path = 1;    // heap numbering: children of p are 2p (+1) and 2p+1 (-1)
    HitTriple triple;          // in the parent's canonical frame
    Stick stick;               // in the parent's canonical frame
    NodeFrame frame;
};

struct EmbeddingTree {
    std::vector<EmbeddingNode> nodes;
    std::vector<std::size_t> generation_sizes;
    int survival_depth = 0;     // deepest nonempty generation
    std::size_t child_trials = 0;
    std::size_t child_successes = 0;
};

// Lemma checks for one child, in the parent's canonical frame.
struct ChildCheck {
    bool ok = false;
    double e_lo = 0.0, e_hi = 0.0;       // ideal endpoints of g_1 seen from o
    double dir_lo = 0.0, dir_hi = 0.0;   // directions at the hit point towards them
};
ChildCheck check_child(const HitTriple& t, int side, double L);

// Box bounds for the +1 child; the -1 child uses the mirrored box.
bool in_child_box(const HitTriple& t, int side, double L);

std::vector<EmbeddingNode> gw_embed_children(const EmbeddingNode& node, double lambda, double L, std::uint64_t seed,
                                             std::uint64_t tree, std::size_t* trials = nullptr,
                                             std::size_t* successes = nullptr);

EmbeddingTree gw_embedding_simulate(double lambda, double L, int max_depth, std::uint64_t seed,
                                    std::uint64_t tree = 0);

// Node stick in global coordinates (composition of the frames up to the root).
// Only meaningful for shallow nodes: depth-2 sticks already lie beyond rho = 50,
// where the polar chart cannot resolve them.
Stick node_global_stick(const EmbeddingTree& t, std::size_t i);

// node,parent,depth,side,rho_prime,varphi,r
void write_tree(std::ostream& os, const EmbeddingTree& t);

// Survival oracles for offspring Bin(2, q).
double gw_survival_prob(double q);                 // 1 - extinction fixed point
double gw_survival_to_depth(double q, int depth);  // P(Z_depth > 0)

}  // namespace hs
