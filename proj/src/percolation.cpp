#include "hypersticks/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>
#include <unordered_map>

#include "hypersticks/kernels.hpp"
#include "hypersticks/parallel.hpp"
#include "hypersticks/rng.hpp"
#include "hypersticks/spatial_index.hpp"

namespace hs {

UnionFind::UnionFind(std::size_t n) : parent_(n), rank_(n, 0)
{
    for (std::size_t i = 0; i < n; ++i) parent_[i] = static_cast<std::uint32_t>(i);
}

std::uint32_t UnionFind::find(std::uint32_t i)
{
    while (parent_[i] != i) {
        parent_[i] = parent_[parent_[i]];
        i = parent_[i];
    }
    return i;
}

bool UnionFind::unite(std::uint32_t a, std::uint32_t b)
{
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    return true;
}

namespace {

ClusterLabeling finish(UnionFind& uf, std::size_t fallbacks)
{
    ClusterLabeling lab;
    const std::size_t n = uf.size();
    lab.label.assign(n, 0);
    std::vector<std::uint32_t> id(n, UINT32_MAX);
    for (std::uint32_t i = 0; i < n; ++i) {
        const std::uint32_t r = uf.find(i);
        if (id[r] == UINT32_MAX) id[r] = static_cast<std::uint32_t>(lab.cluster_count++);
        lab.label[i] = id[r];
    }
    lab.parent = std::move(uf.parent_);
    lab.rank = std::move(uf.rank_);
    lab.fallback_tests = fallbacks;
    return lab;
}

}  // namespace

ClusterLabeling build_clusters(const std::vector<Stick>& sticks)
{
    const std::size_t n = sticks.size();
    UnionFind uf(n);
    if (n < 2) return finish(uf, 0);
    kern::StickGeom g;
    g.assign(sticks);
    StickIndex index(sticks);
    const kern::ClassifyFn classify = kern::classify_best();
    const double tol = std::sinh(kEpsGeo);
    std::vector<std::uint32_t> cand, todo;
    std::vector<std::uint8_t> verdict;
    std::size_t fallbacks = 0;
    for (std::uint32_t i = 0; i < n; ++i) {
        index.candidates(i, cand);
        todo.clear();
        const std::uint32_t ri = uf.find(i);
        for (std::uint32_t j : cand)
            if (uf.find(j) != ri) todo.push_back(j);
        if (todo.empty()) continue;
        verdict.resize(todo.size());
        classify(g, i, todo.data(), todo.size(), tol, verdict.data());
        for (std::size_t k = 0; k < todo.size(); ++k) {
            const std::uint32_t j = todo[k];
            if (verdict[k] == kern::kMeet) {
                uf.unite(i, j);
            } else if (verdict[k] == kern::kUnsure && uf.find(i) != uf.find(j)) {
                ++fallbacks;
                if (sticks_intersect_frame(sticks[i], sticks[j]).has_value()) uf.unite(i, j);
            }
        }
    }
    return finish(uf, fallbacks);
}

ClusterLabeling build_clusters_bruteforce(const std::vector<Stick>& sticks)
{
    const std::size_t n = sticks.size();
    UnionFind uf(n);
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = i + 1; j < n; ++j)
            if (sticks_meet(sticks[i], sticks[j])) uf.unite(i, j);
    return finish(uf, 0);
}

std::size_t two_arm_count(const std::vector<Stick>& sticks, const ClusterLabeling& lab, double r_in, double R)
{
    if (!(r_in < R)) throw std::invalid_argument("two_arm_count: need r_in < R");
    std::vector<std::uint8_t> flags(lab.cluster_count, 0);
    for (std::size_t i = 0; i < sticks.size(); ++i) {
        std::uint8_t f = 0;
        if (max_radius(sticks[i]) >= R) f |= 2;
        if (dist_to_origin(sticks[i]) <= r_in) f |= 1;
        flags[lab.label[i]] |= f;
    }
    return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), std::uint8_t{3}));
}

bool crossing_exists(const std::vector<Stick>& sticks, const ClusterLabeling& lab, double r_in, double R)
{
    return two_arm_count(sticks, lab, r_in, R) > 0;
}

void write_labeling(std::ostream& os, const ClusterLabeling& lab)
{
    os << "stick_index,cluster_id\n";
    for (std::size_t i = 0; i < lab.label.size(); ++i) os << i << ',' << lab.label[i] << '\n';
}

bool in_block_class(const Stick& s, int k, double L)
{
    const auto t = hit_triple(s, 0.0);
    if (!t) return false;
    return t->rho_prime >= k && t->rho_prime <= k + 1 && t->varphi >= 0.25 * kPi && t->varphi <= 0.75 * kPi &&
           t->r >= -0.25 * L && t->r <= 0.25 * L;
}

HalfPlane block_halfplane(const Stick& s, bool upper)
{
    const bool a_up = std::sin(s.ends.a.theta) > std::sin(s.ends.b.theta);
    const double off = 0.375 * s.length;
    return perpendicular_halfplane(s, (a_up == upper) ? off : -off);
}

namespace {

bool side_reaches(const std::vector<Stick>& sticks, const ClusterLabeling& lab, std::size_t l, bool upper,
                  double depth)
{
    const Stick& root = sticks[l];
    const HalfPlane hp = block_halfplane(root, upper);
    std::vector<Stick> sub{root};
    bool any_far = false;
    for (std::size_t m = 0; m < sticks.size(); ++m) {
        if (m == l || lab.label[m] != lab.label[l]) continue;
        const Stick& s = sticks[m];
        if (!halfplane_contains(hp, s.ends.a) || !halfplane_contains(hp, s.ends.b)) continue;
        sub.push_back(s);
        any_far = any_far || std::max(dist(root.center, s.ends.a), dist(root.center, s.ends.b)) >= depth;
    }
    if (!any_far) return false;
    const ClusterLabeling sl = build_clusters(sub);
    for (std::size_t m = 1; m < sub.size(); ++m) {
        if (sl.label[m] != sl.label[0]) continue;
        if (std::max(dist(root.center, sub[m].ends.a), dist(root.center, sub[m].ends.b)) >= depth) return true;
    }
    return false;
}

}  // namespace

bool blocking_indicator(const std::vector<Stick>& sticks, const ClusterLabeling& lab, int k, double L,
                        double depth_radius)
{
    for (std::size_t l = 0; l < sticks.size(); ++l) {
        if (!in_block_class(sticks[l], k, L)) continue;
        if (side_reaches(sticks, lab, l, true, depth_radius) && side_reaches(sticks, lab, l, false, depth_radius))
            return true;
    }
    return false;
}

HkCheck hk_disjointness_check(const Stick& lk, const Stick& lk4, double L)
{
    (void)L;
    HkCheck c;
    const HalfPlane hk = block_halfplane(lk, true), hk4 = block_halfplane(lk4, true);
    c.arc_k = boundary_arc(hk);
    c.arc_k4 = boundary_arc(hk4);
    auto upper = [](const Arc& a) { return a.start > 0.0 && a.start + a.length < kPi; };
    c.upper_k = upper(c.arc_k);
    c.upper_k4 = upper(c.arc_k4);
    c.disjoint = halfplanes_disjoint(hk, hk4);
    c.ok = c.upper_k && c.upper_k4 && c.disjoint;
    const auto t = hit_triple(lk, 0.0);
    if (t) {
        const HPoint z = make_point(t->rho_prime, 0.0);
        const bool a_up = std::sin(lk.ends.a.theta) > std::sin(lk.ends.b.theta);
        const HPoint xp = point_on_stick(lk, (a_up ? 1.0 : -1.0) * 0.375 * lk.length);
        c.alpha_k = wrap_signed(direction_at(z, xp) - direction_to_ideal(z, c.arc_k.start));
        c.beta_k = direction_to_ideal(z, c.arc_k4.start + c.arc_k4.length);
    }
    return c;
}

namespace {

struct LazyProcess {
    double lambda, L;
    std::uint64_t seed, rep;
    std::unordered_map<std::uint64_t, std::vector<Stick>> cells;
    std::unordered_map<std::uint64_t, std::vector<std::uint8_t>> taken;

    std::vector<Stick>& cell(std::uint64_t key)
    {
        auto it = cells.find(key);
        if (it != cells.end()) return it->second;
        const std::uint64_t b = CellGrid::band_of(key), sec = CellGrid::sector_of(key);
        const double n = static_cast<double>(CellGrid::sectors(b));
        const double c0 = std::cosh(static_cast<double>(b)), c1 = std::cosh(static_cast<double>(b) + 1.0);
        Stream rng(seed, rep, Role::cell, key);
        const std::uint64_t cnt = poisson_quantile(rng.uniform(), lambda * CellGrid::area(key));
        std::vector<Stick> v;
        v.reserve(cnt);
        for (std::uint64_t i = 0; i < cnt; ++i) {
            const double rho = std::acosh(c0 + rng.uniform() * (c1 - c0));
            const double theta = (static_cast<double>(sec) + rng.uniform()) * kTwoPi / n;
            const double phi = kPi * rng.uniform();
            v.push_back(make_stick(make_point(rho, theta), phi, L));
        }
        taken.emplace(key, std::vector<std::uint8_t>(v.size(), 0));
        return cells.emplace(key, std::move(v)).first->second;
    }
};

}  // namespace

RootedCluster rooted_cluster(double lambda, double L, std::uint64_t seed, std::uint64_t replicate,
                             double max_radius_limit, std::size_t max_size)
{
    RootedCluster out;
    const Stick root = make_stick(HPoint{}, 0.0, L);
    out.reach = 0.5 * L;
    if (lambda <= 0.0) return out;
    LazyProcess proc{lambda, L, seed, replicate, {}, {}};
    const double h = std::min(1.0, L);
    const std::vector<double> offs = sample_offsets(L, h);
    const double delta = 0.5 * L + 0.5 * h + 1e-9;
    std::deque<Stick> queue{root};
    std::vector<std::uint64_t> keys;
    while (!queue.empty()) {
        const Stick s = queue.front();
        queue.pop_front();
        keys.clear();
        for (double t : offs)
            CellGrid::for_each_near(point_on_stick(s, t), delta, [&](std::uint64_t k) { keys.push_back(k); });
        std::sort(keys.begin(), keys.end());
        keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
        for (std::uint64_t k : keys) {
            auto& v = proc.cell(k);
            auto& used = proc.taken[k];
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (used[i] || !sticks_meet(s, v[i])) continue;
                used[i] = 1;
                ++out.size;
                const double rmax = max_radius(v[i]);
                out.reach = std::max(out.reach, rmax);
                if (rmax > max_radius_limit || out.size > max_size) {
                    out.truncated = true;
                    return out;
                }
                queue.push_back(v[i]);
            }
        }
    }
    return out;
}

SubcriticalStats subcritical_cluster_stats(double lambda, double L, std::size_t n_reps, std::uint64_t seed,
                                           double max_radius_limit, unsigned threads)
{
    if (!(lambda >= 0) || !(L > 0)) throw std::invalid_argument("subcritical: bad lambda or L");
    if (n_reps == 0) throw std::invalid_argument("subcritical: reps must be >= 1");
    SubcriticalStats st;
    st.lambda = lambda;
    st.L = L;
    st.m = offspring_mean(lambda, L);
    if (!(st.m < 1.0)) throw std::invalid_argument("subcritical: offspring mean must be < 1");
    st.gw_bound = 1.0 / (1.0 - st.m);
    st.reps = n_reps;
    std::vector<RootedCluster> res(n_reps);
    parallel_for(n_reps, threads, [&](std::size_t r) { res[r] = rooted_cluster(lambda, L, seed, r, max_radius_limit); });
    double sum = 0, sum2 = 0, reach = 0;
    for (const auto& c : res) {
        const double x = static_cast<double>(c.size);
        sum += x;
        sum2 += x * x;
        reach += c.reach;
        st.truncated += c.truncated ? 1 : 0;
        st.max_size = std::max(st.max_size, c.size);
    }
    const double n = static_cast<double>(n_reps);
    st.mean_size = sum / n;
    st.mean_reach = reach / n;
    const double var = n > 1 ? (sum2 - sum * sum / n) / (n - 1) : 0.0;
    st.stderr_size = std::sqrt(std::max(var, 0.0) / n);
    return st;
}

}  // namespace hs
