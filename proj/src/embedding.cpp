#include "hypersticks/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <tuple>

#include "hypersticks/stickproc.hpp"

namespace hs {

HPoint frame_apply(const NodeFrame& f, const HPoint& q)
{
    const Vec3 v = to_frame(f.center, q);
    return make_point(std::asinh(std::hypot(v.x, v.y)), std::atan2(v.y, v.x) - f.rotation);
}

HPoint frame_inverse(const NodeFrame& f, const HPoint& p)
{
    return from_frame(f.center.rho, f.center.theta, p.rho, p.theta + f.rotation);
}

bool in_child_box(const HitTriple& t, int side, double L)
{
    if (t.rho_prime < 0.25 * L || t.rho_prime > 0.5 * L) return false;
    if (side > 0) return t.varphi >= kPi / 6 && t.varphi <= kPi / 3 && t.r >= 0.25 * L && t.r <= 0.5 * L;
    return t.varphi >= 2 * kPi / 3 && t.varphi <= 5 * kPi / 6 && t.r >= -0.5 * L && t.r <= -0.25 * L;
}

namespace {

NodeFrame child_frame(const Stick& s, const HitTriple& t)
{
    const HPoint z = make_point(t.rho_prime, 0.0);
    return {s.center, direction_at(s.center, z) + kPi};
}

}  // namespace

ChildCheck check_child(const HitTriple& t, int side, double L)
{
    ChildCheck c;
    const Stick s = stick_from_triple(t, L, 0.0);
    const NodeFrame f = child_frame(s, t);
    const double e1 = ideal_angle(f.center.rho, f.center.theta, f.rotation + 0.5 * kPi);
    const double e2 = ideal_angle(f.center.rho, f.center.theta, f.rotation - 0.5 * kPi);
    const HPoint z = make_point(t.rho_prime, 0.0);
    double d1 = direction_to_ideal(z, e1), d2 = direction_to_ideal(z, e2);
    c.e_lo = std::min(e1, e2);
    c.e_hi = std::max(e1, e2);
    c.dir_lo = std::min(d1, d2);
    c.dir_hi = std::max(d1, d2);

    const double slack = 4.0 * std::exp(-0.25 * L);
    bool ok;
    if (side > 0) {
        ok = c.e_lo > 0.0 && c.e_hi < 0.5 * kPi;
        ok = ok && c.dir_lo >= kPi / 6 - slack && c.dir_hi <= kPi / 3 + slack;
    } else {
        ok = c.e_lo > 1.5 * kPi && c.e_hi < kTwoPi;
        ok = ok && c.dir_lo >= -kPi / 3 - slack && c.dir_hi <= -kPi / 6 + slack;
    }
    // l_1 inside H_0
    ok = ok && std::cos(s.ends.a.theta) >= 0.0 && std::cos(s.ends.b.theta) >= 0.0;
    c.ok = ok;
    return c;
}

std::vector<EmbeddingNode> gw_embed_children(const EmbeddingNode& node, double lambda, double L, std::uint64_t seed,
                                             std::uint64_t tree, std::size_t* trials, std::size_t* successes)
{
    if (!(L >= 20.0)) throw std::invalid_argument("embedding requires L >= 20");
    ProcessConfig cfg{lambda, L, 0.5 * L, seed};
    std::vector<EmbeddingNode> out;
    if (trials) *trials += 2;
    if (lambda <= 0.0) return out;
    const auto draws = draw_restricted(cfg, 0.25 * L, 0.5 * L, 0.0, tree, false, PhiLaw::sine, node.path, Role::gw);
    std::vector<ChildCheck> checks;
    for (int side : {+1, -1}) {
        const HitTriple* best = nullptr;
        for (const auto& d : draws) {
            if (!in_child_box(d.triple, side, L)) continue;
            if (!best || std::tie(d.triple.rho_prime, d.triple.varphi, d.triple.r) <
                             std::tie(best->rho_prime, best->varphi, best->r))
                best = &d.triple;
        }
        if (!best) continue;
        const ChildCheck chk = check_child(*best, side, L);
        if (!chk.ok) {
            std::ostringstream os;
            os << "half-plane check failed at node " << node.path << " side " << side << ": ideal ends ("
               << chk.e_lo << ", " << chk.e_hi << "), directions (" << chk.dir_lo << ", " << chk.dir_hi << ")";
            throw GeometryCheckError(os.str());
        }
        checks.push_back(chk);
        EmbeddingNode c;
        c.depth = node.depth + 1;
        c.side = side;
        c.path = 2 * node.path + (side > 0 ? 0 : 1);
        c.triple = *best;
        c.stick = stick_from_triple(*best, L, 0.0);
        c.frame = child_frame(c.stick, *best);
        out.push_back(c);
    }
    if (checks.size() == 2) {
        const Arc a{checks[0].e_lo, checks[0].e_hi - checks[0].e_lo};
        const Arc b{checks[1].e_lo, checks[1].e_hi - checks[1].e_lo};
        if (arc_contains(a, b.start) || arc_contains(a, b.start + b.length) || arc_contains(b, a.start))
            throw GeometryCheckError("children half-planes intersect");
    }
    if (successes) *successes += out.size();
    return out;
}

EmbeddingTree gw_embedding_simulate(double lambda, double L, int max_depth, std::uint64_t seed, std::uint64_t tree)
{
    if (!(L >= 20.0)) throw std::invalid_argument("embedding requires L >= 20");
    if (max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
    if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
    EmbeddingTree t;
    EmbeddingNode root;
    root.stick = make_stick(HPoint{}, 0.0, L);
    t.nodes.push_back(root);
    t.generation_sizes.push_back(1);
    std::size_t begin = 0, end = 1;
    for (int d = 0; d < max_depth && begin < end; ++d) {
        for (std::size_t i = begin; i < end; ++i) {
            auto kids = gw_embed_children(t.nodes[i], lambda, L, seed, tree, &t.child_trials, &t.child_successes);
            for (auto& k : kids) {
                k.parent = static_cast<int>(i);
                t.nodes.push_back(k);
            }
        }
        begin = end;
        end = t.nodes.size();
        if (end > begin) {
            t.generation_sizes.push_back(end - begin);
            t.survival_depth = d + 1;
        }
    }
    return t;
}

Stick node_global_stick(const EmbeddingTree& t, std::size_t i)
{
    const EmbeddingNode& n = t.nodes.at(i);
    if (n.parent < 0) return n.stick;
    HPoint a = n.stick.ends.a, b = n.stick.ends.b;
    for (int p = n.parent; p > 0; p = t.nodes[p].parent) {
        a = frame_inverse(t.nodes[p].frame, a);
        b = frame_inverse(t.nodes[p].frame, b);
    }
    return stick_from_segment({a, b});
}

void write_tree(std::ostream& os, const EmbeddingTree& t)
{
    os << "node,parent,depth,side,rho_prime,varphi,r\n";
    os.precision(17);
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
        const auto& n = t.nodes[i];
        os << i << ',' << n.parent << ',' << n.depth << ',' << n.side << ',' << n.triple.rho_prime << ','
           << n.triple.varphi << ',' << n.triple.r << '\n';
    }
}

double gw_survival_prob(double q)
{
    double s = 0.0;
    for (int i = 0; i < 1000000; ++i) {
        const double u = 1.0 - q + q * s;
        const double next = u * u;
        if (std::fabs(next - s) < 1e-15) return 1.0 - next;
        s = next;
    }
    return 1.0 - s;
}

double gw_survival_to_depth(double q, int depth)
{
    double s = 0.0;
    for (int i = 0; i < depth; ++i) {
        const double u = 1.0 - q + q * s;
        s = u * u;
    }
    return 1.0 - s;
}

}  // namespace hs
