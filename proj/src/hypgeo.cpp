#include "hypersticks/hypgeo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

#include "hypersticks/kernels.hpp"

namespace hs {

double wrap_angle(double a)
{
    double r = std::fmod(a, kTwoPi);
    if (r < 0) r += kTwoPi;
    if (r >= kTwoPi) r = 0.0;
    return r;
}

double wrap_pi(double a)
{
    double r = std::fmod(a, kPi);
    if (r < 0) r += kPi;
    if (r >= kPi) r = 0.0;
    return r;
}

double wrap_signed(double a)
{
    double r = wrap_angle(a);
    return r > kPi ? r - kTwoPi : r;
}

HPoint make_point(double rho, double theta)
{
    if (!(rho > 0.0)) return {0.0, 0.0};
    return {rho, wrap_angle(theta)};
}

double mdot(const Vec3& a, const Vec3& b) { return -a.t * b.t + a.x * b.x + a.y * b.y; }

Vec3 mcross(const Vec3& a, const Vec3& b)
{
    return {-(a.x * b.y - a.y * b.x), a.y * b.t - a.t * b.y, a.t * b.x - a.x * b.t};
}

Vec3 lift(const HPoint& p)
{
    const double s = std::sinh(p.rho);
    return {std::cosh(p.rho), s * std::cos(p.theta), s * std::sin(p.theta)};
}

double dist(const HPoint& p, const HPoint& q)
{
    // sinh^2(d/2) = sinh^2(dr/2) + sinh(rp) sinh(rq) sin^2(dtheta/2)
    const double h = std::sinh(0.5 * (p.rho - q.rho));
    const double s = std::sin(0.5 * (p.theta - q.theta));
    const double v = h * h + std::sinh(p.rho) * std::sinh(q.rho) * s * s;
    return 2.0 * std::asinh(std::sqrt(v));
}

DiscPoint to_disc(const HPoint& p)
{
    const double r = std::tanh(0.5 * p.rho);
    return {r * std::cos(p.theta), r * std::sin(p.theta)};
}

HPoint from_disc(const DiscPoint& d)
{
    const double n = std::hypot(d.u, d.v);
    if (!(n < 1.0)) throw std::domain_error("disc point outside the unit disc");
    return make_point(2.0 * std::atanh(n), std::atan2(d.v, d.u));
}

double ball_volume(double rho)
{
    const double s = std::sinh(0.5 * rho);
    return 4.0 * kPi * s * s;
}

double chord_distance(double rho, double varphi)
{
    return 2.0 * std::asinh(std::sinh(rho) * std::sin(0.5 * varphi));
}

std::vector<HPoint> circle_cover_points(double rho)
{
    if (!(rho > 0)) throw std::invalid_argument("circle_cover_points: rho must be positive");
    const auto n = static_cast<std::size_t>(std::ceil(kPi * std::sinh(rho)));
    std::vector<HPoint> pts;
    pts.reserve(n);
    for (std::size_t k = 0; k < n; ++k)
        pts.push_back(make_point(rho, kTwoPi * static_cast<double>(k) / static_cast<double>(n)));
    return pts;
}

Vec3 to_frame(double a_rho, double a_theta, const HPoint& q)
{
    const double d = q.theta - a_theta;
    const double h = std::sin(0.5 * d);
    const double s2 = h * h;
    const double sq = std::sinh(q.rho);
    const double dr = q.rho - a_rho;
    return {std::cosh(dr) + 2.0 * std::sinh(a_rho) * sq * s2,
            std::sinh(dr) - 2.0 * std::cosh(a_rho) * sq * s2,
            sq * std::sin(d)};
}

HPoint from_frame(double a_rho, double a_theta, double s, double dir)
{
    const double c = std::cos(0.5 * dir);
    const double c2 = c * c;
    const double h = std::sinh(0.5 * (a_rho - s));
    const double ss = std::sinh(s);
    const double v = h * h + std::sinh(a_rho) * ss * c2;
    const double rho = 2.0 * std::asinh(std::sqrt(std::max(v, 0.0)));
    const double x = std::sinh(a_rho - s) + 2.0 * c2 * std::cosh(a_rho) * ss;
    const double y = ss * std::sin(dir);
    return make_point(rho, a_theta + std::atan2(y, x));
}

HPoint translate_to(const HPoint& x, const HPoint& p)
{
    // I^x carries the frame at o onto the frame at x, whose axis is the ray o->x
    if (x.rho <= 0.0) return make_point(p.rho, p.theta);
    return from_frame(x.rho, x.theta, p.rho, p.theta - x.theta);
}

double ideal_angle(double a_rho, double a_theta, double dir)
{
    const double c = std::cos(0.5 * dir);
    const double x = 2.0 * c * c * std::cosh(a_rho) - std::exp(-a_rho);
    return wrap_angle(a_theta + std::atan2(std::sin(dir), x));
}

double direction_at(const HPoint& from, const HPoint& to)
{
    const Vec3 v = to_frame(from, to);
    return std::atan2(v.y, v.x);
}

double direction_to_ideal(const HPoint& a, double omega)
{
    const double d = omega - a.theta;
    const double h = std::sin(0.5 * d);
    return std::atan2(std::sin(d), std::exp(-a.rho) - 2.0 * std::cosh(a.rho) * h * h);
}

Stick make_stick(const HPoint& x, double phi, double L)
{
    if (!(L > 0)) throw std::invalid_argument("make_stick: length must be positive");
    Stick s;
    s.center = make_point(x.rho, x.theta);
    s.phi = wrap_pi(phi);
    s.length = L;
    s.ends.a = from_frame(s.center.rho, s.center.theta, 0.5 * L, s.phi);
    s.ends.b = from_frame(s.center.rho, s.center.theta, 0.5 * L, s.phi + kPi);
    return s;
}

Stick stick_from_segment(const Segment& seg)
{
    const Vec3 v = to_frame(seg.a, seg.b);
    const double d = std::asinh(std::hypot(v.x, v.y));
    if (!(d > 0)) throw std::invalid_argument("segment has zero length");
    const HPoint m = from_frame(seg.a.rho, seg.a.theta, 0.5 * d, std::atan2(v.y, v.x));
    const double to_a = direction_at(m, seg.a);
    Stick s;
    s.center = m;
    s.length = d;
    s.phi = wrap_pi(to_a);
    // keep ends.a on the phi side
    if (std::fabs(wrap_signed(to_a - s.phi)) < 0.5 * kPi)
        s.ends = seg;
    else
        s.ends = {seg.b, seg.a};
    return s;
}

Vec3 stick_coords(const Stick& s, const HPoint& q)
{
    const Vec3 v = to_frame(s.center, q);
    const double c = std::cos(s.phi), sn = std::sin(s.phi);
    return {v.t, c * v.x + sn * v.y, -sn * v.x + c * v.y};
}

HPoint point_on_stick(const Stick& s, double t)
{
    if (t >= 0) return from_frame(s.center.rho, s.center.theta, t, s.phi);
    return from_frame(s.center.rho, s.center.theta, -t, s.phi + kPi);
}

namespace {

// Signed position of the foot of the perpendicular from p onto the x-axis of a frame.
inline double foot(const Vec3& p) { return std::asinh(p.x / std::sqrt(1.0 + p.y * p.y)); }

bool stick_less(const Stick& a, const Stick& b)
{
    return std::tie(a.center.rho, a.center.theta, a.phi, a.length) <
           std::tie(b.center.rho, b.center.theta, b.phi, b.length);
}

// Overlap of q's projection with p along p's axis when q lies on that axis.
std::optional<HPoint> axis_overlap(const Stick& p, const Vec3& qa, const Vec3& qb, double eps)
{
    const double h = 0.5 * p.length;
    const double ua = foot(qa), ub = foot(qb);
    double lo = std::max(std::min(ua, ub), -h);
    double hi = std::min(std::max(ua, ub), h);
    if (lo > hi + eps) return std::nullopt;
    if (lo > hi) lo = hi = 0.5 * (lo + hi);
    return point_on_stick(p, 0.5 * (lo + hi));
}

// Crossing of q with p's axis, clamped to p.
HPoint axis_crossing(const Stick& p, const Vec3& qa, const Vec3& qb)
{
    const double h = 0.5 * p.length;
    double u;
    if ((qa.y <= 0 && qb.y >= 0) || (qa.y >= 0 && qb.y <= 0)) {
        const double wa = std::fabs(qb.y), wb = std::fabs(qa.y);
        const Vec3 z{wa * qa.t + wb * qb.t, wa * qa.x + wb * qb.x, wa * qa.y + wb * qb.y};
        const double n2 = (z.t - z.x) * (z.t + z.x);
        u = n2 > 0 ? std::asinh(z.x / std::sqrt(n2)) : (z.x > 0 ? h : -h);
    } else {
        u = std::fabs(qa.y) < std::fabs(qb.y) ? foot(qa) : foot(qb);
    }
    return point_on_stick(p, std::clamp(u, -h, h));
}

inline bool straddles(const Vec3& a, const Vec3& b, double tol)
{
    return std::min(a.y, b.y) <= tol && std::max(a.y, b.y) >= -tol;
}

}  // namespace

std::optional<HPoint> sticks_intersect_frame(const Stick& s1, const Stick& s2, double eps)
{
    const Stick* p = &s1;
    const Stick* q = &s2;
    if (stick_less(s2, s1)) std::swap(p, q);
    const double tol = std::sinh(eps);
    const Vec3 qa = stick_coords(*p, q->ends.a), qb = stick_coords(*p, q->ends.b);
    const Vec3 pa = stick_coords(*q, p->ends.a), pb = stick_coords(*q, p->ends.b);

    if (std::fabs(qa.y) <= tol && std::fabs(qb.y) <= tol) {
        if (auto r = axis_overlap(*p, qa, qb, eps)) return r;
    }
    if (std::fabs(pa.y) <= tol && std::fabs(pb.y) <= tol) {
        if (auto r = axis_overlap(*q, pa, pb, eps)) return r;
    }
    if (!straddles(qa, qb, tol) || !straddles(pa, pb, tol)) return std::nullopt;
    if (std::fabs(qa.y) <= tol && std::fabs(qb.y) <= tol) return std::nullopt;
    return axis_crossing(*p, qa, qb);
}

bool sticks_meet(const Stick& s1, const Stick& s2, double eps)
{
    kern::StickGeom g;
    g.reserve(2);
    g.push(s1);
    g.push(s2);
    const std::uint32_t j = 1;
    std::uint8_t c = 0;
    kern::classify_scalar(g, 0, &j, 1, std::sinh(eps), &c);
    if (c == kern::kMeet) return true;
    if (c == kern::kApart) return false;
    return sticks_intersect_frame(s1, s2, eps).has_value();
}

std::optional<HPoint> sticks_intersect(const Stick& s1, const Stick& s2, double eps)
{
    if (!sticks_meet(s1, s2, eps)) return std::nullopt;
    if (auto r = sticks_intersect_frame(s1, s2, eps)) return r;
    // certain crossing that the frame test rounds away: report the axis crossing
    const Stick* p = &s1;
    const Stick* q = &s2;
    if (stick_less(s2, s1)) std::swap(p, q);
    return axis_crossing(*p, stick_coords(*p, q->ends.a), stick_coords(*p, q->ends.b));
}

std::optional<HPoint> segments_intersect(const Segment& s1, const Segment& s2, double eps)
{
    return sticks_intersect(stick_from_segment(s1), stick_from_segment(s2), eps);
}

double dist_to_origin(const Stick& s)
{
    const Vec3 o = stick_coords(s, HPoint{});
    if (std::fabs(foot(o)) <= 0.5 * s.length) return std::asinh(std::fabs(o.y));
    return std::min(s.ends.a.rho, s.ends.b.rho);
}

double max_radius(const Stick& s) { return std::max(s.ends.a.rho, s.ends.b.rho); }

Triangle triangle_from_sides(double A, double B, double C)
{
    if (!(A > 0 && B > 0 && C > 0) || !(A < B + C && B < A + C && C < A + B))
        throw std::invalid_argument("triangle_from_sides: sides violate the triangle inequality");
    // half-angle form; the cosine-law acos loses digits for thin triangles
    const double s = 0.5 * (A + B + C);
    auto angle = [s](double opp, double s1, double s2) {
        const double t = std::sinh(s - s1) * std::sinh(s - s2) / (std::sinh(s) * std::sinh(s - opp));
        return 2.0 * std::atan(std::sqrt(t));
    };
    return {A, B, C, angle(A, B, C), angle(B, A, C), angle(C, A, B)};
}

double ideal_angle_gap(double beta, double gamma)
{
    if (!(beta > 0 && beta < kPi && gamma > 0 && gamma < kPi))
        throw std::invalid_argument("ideal_angle_gap: angles must lie in (0, pi)");
    // beta + gamma = pi is the degenerate C = 0 case
    if (beta + gamma > kPi + 1e-12) throw std::invalid_argument("ideal_angle_gap: beta + gamma > pi");
    const double c = (1.0 + std::cos(beta) * std::cos(gamma)) / (std::sin(beta) * std::sin(gamma));
    return std::acosh(std::max(c, 1.0));
}

std::optional<HitTriple> hit_triple(const Stick& s, double ray_angle, double eps)
{
    const double tol = std::sinh(eps);
    const double h = 0.5 * s.length;
    const HPoint& A = s.ends.a;
    const HPoint& B = s.ends.b;
    const double alA = A.theta - ray_angle, alB = B.theta - ray_angle;
    const double shA = std::sinh(A.rho), shB = std::sinh(B.rho);
    const double ya = shA * std::sin(alA), yb = shB * std::sin(alB);

    auto pos = [&](const HPoint& p) {
        const double sh = std::sinh(p.rho), y = sh * std::sin(p.theta - ray_angle);
        return std::asinh(sh * std::cos(p.theta - ray_angle) / std::sqrt(1.0 + y * y));
    };

    if (std::fabs(ya) <= tol && std::fabs(yb) <= tol) {
        const double ua = pos(A), ub = pos(B);
        if (std::max(ua, ub) < -eps) return std::nullopt;
        const double rp = std::max(std::min(ua, ub), 0.0);
        return HitTriple{rp, 0.0, std::clamp(pos(s.center) - rp, -h, h)};
    }
    if (std::min(ya, yb) > tol || std::max(ya, yb) < -tol) return std::nullopt;

    double u;
    if ((ya <= 0 && yb >= 0) || (ya >= 0 && yb <= 0)) {
        const double wa = std::fabs(yb), wb = std::fabs(ya);
        auto half = [](double a) {
            const double c = std::cos(0.5 * a), sn = std::sin(0.5 * a);
            return std::pair{c * c, sn * sn};
        };
        const auto [cA, sA] = half(alA);
        const auto [cB, sB] = half(alB);
        const double plus = wa * (std::exp(-A.rho) + 2.0 * shA * cA) + wb * (std::exp(-B.rho) + 2.0 * shB * cB);
        const double minus = wa * (std::exp(-A.rho) + 2.0 * shA * sA) + wb * (std::exp(-B.rho) + 2.0 * shB * sB);
        u = 0.5 * std::log(plus / minus);
    } else {
        u = std::fabs(ya) < std::fabs(yb) ? pos(A) : pos(B);
    }
    if (u < -eps) return std::nullopt;
    u = std::max(u, 0.0);

    const Vec3 va = to_frame(u, ray_angle, A), vb = to_frame(u, ray_angle, B);
    const Vec3& far = va.t >= vb.t ? va : vb;
    const double phi = wrap_pi(std::atan2(far.y, far.x));
    const Vec3 vc = to_frame(u, ray_angle, s.center);
    const double r = std::asinh(vc.x * std::cos(phi) + vc.y * std::sin(phi));
    return HitTriple{u, phi, std::clamp(r, -h, h)};
}

Arc boundary_arc(const HalfPlane& hp)
{
    if (hp.left) return {wrap_angle(hp.e2), wrap_angle(hp.e1 - hp.e2)};
    return {wrap_angle(hp.e1), wrap_angle(hp.e2 - hp.e1)};
}

bool arc_contains(const Arc& a, double angle) { return wrap_angle(angle - a.start) <= a.length; }

bool halfplanes_disjoint(const HalfPlane& a, const HalfPlane& b)
{
    const Arc x = boundary_arc(a), y = boundary_arc(b);
    return !arc_contains(x, y.start) && !arc_contains(x, y.start + y.length) && !arc_contains(y, x.start);
}

bool halfplane_within(const HalfPlane& inner, const HalfPlane& outer)
{
    const Arc x = boundary_arc(inner), y = boundary_arc(outer);
    return wrap_angle(x.start - y.start) + x.length <= y.length;
}

bool halfplane_contains(const HalfPlane& hp, const HPoint& p)
{
    const Vec3 k1{1.0, std::cos(hp.e1), std::sin(hp.e1)};
    const Vec3 k2{1.0, std::cos(hp.e2), std::sin(hp.e2)};
    const Vec3 n = mcross(k1, k2);
    const Arc arc = boundary_arc(hp);
    const double mid = arc.start + 0.5 * arc.length;
    const double ref = mdot(n, Vec3{1.0, std::cos(mid), std::sin(mid)});
    const double v = mdot(n, lift(p));
    return v * ref >= 0.0;
}

HalfPlane perpendicular_halfplane(const Stick& s, double t)
{
    const double h = 0.5 * s.length;
    const HPoint p = point_on_stick(s, t);
    // direction at p pointing away from the side to be excluded
    double fwd;
    if (t > 0)
        fwd = t < h ? direction_at(p, s.ends.a) : direction_at(p, s.center) + kPi;
    else if (t < 0)
        fwd = t > -h ? direction_at(p, s.ends.b) : direction_at(p, s.center) + kPi;
    else
        fwd = direction_at(p, s.ends.a);
    HalfPlane hp;
    hp.e1 = ideal_angle(p.rho, p.theta, fwd + 0.5 * kPi);
    hp.e2 = ideal_angle(p.rho, p.theta, fwd - 0.5 * kPi);
    hp.left = true;
    return hp;
}

}  // namespace hs
