// Hyperbolic plane geometry in the polar chart.
#pragma once

#include <numbers>
#include <optional>
#include <vector>

namespace hs {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Absolute tolerance, in hyperbolic length, shared by all predicates.
inline constexpr double kEpsGeo = 1e-9;

struct HPoint {
    double rho = 0.0;
    double theta = 0.0;
};

struct DiscPoint {
    double u = 0.0;
    double v = 0.0;
};

// Point of the hyperboloid model, or any vector of R^{2,1}.
struct Vec3 {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
};

struct Segment {
    HPoint a;
    HPoint b;
};

// l_L(center, phi). ends.a lies in direction phi from the center, ends.b in phi + pi.
struct Stick {
    HPoint center;
    double phi = 0.0;
    double length = 0.0;
    Segment ends;
};

// Geodesic with ideal endpoints e1, e2 (boundary angles). The half-plane is the
// closed side to the left when travelling from e1 to e2.
struct HalfPlane {
    double e1 = 0.0;
    double e2 = 0.0;
    bool left = true;
};

struct Triangle {
    double A = 0.0, B = 0.0, C = 0.0;
    double alpha = 0.0, beta = 0.0, gamma = 0.0;
};

struct HitTriple {
    double rho_prime = 0.0;
    double varphi = 0.0;
    double r = 0.0;
};

double wrap_angle(double a);   // [0, 2pi)
double wrap_pi(double a);      // [0, pi)
double wrap_signed(double a);  // (-pi, pi]
HPoint make_point(double rho, double theta);

double mdot(const Vec3& a, const Vec3& b);
Vec3 mcross(const Vec3& a, const Vec3& b);
Vec3 lift(const HPoint& p);

double dist(const HPoint& p, const HPoint& q);
DiscPoint to_disc(const HPoint& p);
HPoint from_disc(const DiscPoint& d);
double ball_volume(double rho);
double chord_distance(double rho, double varphi);
std::vector<HPoint> circle_cover_points(double rho);
HPoint translate_to(const HPoint& x, const HPoint& p);

// Coordinates of q in the frame centred at (a_rho, a_theta) whose +x axis is the
// outward radial direction there (the global +x direction rotated by a_theta at o).
Vec3 to_frame(double a_rho, double a_theta, const HPoint& q);
inline Vec3 to_frame(const HPoint& a, const HPoint& q) { return to_frame(a.rho, a.theta, q); }
// The point at distance s from a in direction dir of that frame.
HPoint from_frame(double a_rho, double a_theta, double s, double dir);
// Boundary angle reached by the geodesic ray from a in direction dir.
double ideal_angle(double a_rho, double a_theta, double dir);
// Direction at `from` towards `to`, in the frame convention above.
double direction_at(const HPoint& from, const HPoint& to);
// Direction at a towards the boundary point at angle omega.
double direction_to_ideal(const HPoint& a, double omega);

Stick make_stick(const HPoint& x, double phi, double L);
Stick stick_from_segment(const Segment& s);
// Frame of the stick: centre at the origin, ends.a at (+L/2, 0).
Vec3 stick_coords(const Stick& s, const HPoint& q);
HPoint point_on_stick(const Stick& s, double t);
double dist_to_origin(const Stick& s);
double max_radius(const Stick& s);

std::optional<HPoint> segments_intersect(const Segment& s1, const Segment& s2, double eps = kEpsGeo);
std::optional<HPoint> sticks_intersect(const Stick& s1, const Stick& s2, double eps = kEpsGeo);
// Same verdict as sticks_intersect without computing the point. Uses the
// batched classification kernel with the frame test as fallback.
bool sticks_meet(const Stick& s1, const Stick& s2, double eps = kEpsGeo);
// Frame-based test only; the fallback used for pairs the kernel cannot decide.
std::optional<HPoint> sticks_intersect_frame(const Stick& s1, const Stick& s2, double eps = kEpsGeo);

Triangle triangle_from_sides(double A, double B, double C);
double ideal_angle_gap(double beta, double gamma);

std::optional<HitTriple> hit_triple(const Stick& s, double ray_angle, double eps = kEpsGeo);

// Half-planes via their boundary arcs (counterclockwise start, length).
struct Arc {
    double start = 0.0;
    double length = 0.0;
};
Arc boundary_arc(const HalfPlane& h);
bool arc_contains(const Arc& a, double angle);
bool halfplanes_disjoint(const HalfPlane& a, const HalfPlane& b);
bool halfplane_within(const HalfPlane& inner, const HalfPlane& outer);
bool halfplane_contains(const HalfPlane& h, const HPoint& p);
// Half-plane bounded by the geodesic perpendicular to s at stick offset t, on the side
// away from the centre (towards ends.a when t == 0).
HalfPlane perpendicular_halfplane(const Stick& s, double t);

}  // namespace hs
