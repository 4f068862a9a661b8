#include "hypersticks/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>

namespace hs::kern {

void StickGeom::clear()
{
    for (auto* v : {&at, &ax, &ay, &bt, &bx, &by, &nt, &nx, &ny, &nn}) v->clear();
}

void StickGeom::reserve(std::size_t n)
{
    for (auto* v : {&at, &ax, &ay, &bt, &bx, &by, &nt, &nx, &ny, &nn}) v->reserve(n);
}

void StickGeom::push(const Stick& s)
{
    const Vec3 a = lift(s.ends.a);
    const Vec3 b = lift(s.ends.b);
    at.push_back(a.t);
    ax.push_back(a.x);
    ay.push_back(a.y);
    bt.push_back(b.t);
    bx.push_back(b.x);
    by.push_back(b.y);

    const double sh = std::sinh(s.center.rho), ch = std::cosh(s.center.rho);
    const double sp = std::sin(s.phi), cp = std::cos(s.phi);
    const double st = std::sin(s.center.theta), ct = std::cos(s.center.theta);
    const double n0 = -sh * sp;
    const double n1 = -ch * sp * ct - cp * st;
    const double n2 = -ch * sp * st + cp * ct;
    nt.push_back(n0);
    nx.push_back(n1);
    ny.push_back(n2);
    nn.push_back(std::fabs(n0) + std::fabs(n1) + std::fabs(n2));
}

void StickGeom::assign(const std::vector<Stick>& sticks)
{
    clear();
    reserve(sticks.size());
    for (const auto& s : sticks) push(s);
}

namespace {

inline double side(double nt, double nx, double ny, double pt, double px, double py)
{
    return (-(nt * pt) + nx * px) + ny * py;
}

// 0 certainly false, 1 certainly true, 2 undecided.
inline int straddle(double sa, double sb, double ea, double eb, double tol)
{
    const double la = sa - ea, ha = sa + ea, lb = sb - eb, hb = sb + eb;
    if (std::min(la, lb) > tol || std::max(ha, hb) < -tol) return 0;
    if (std::min(ha, hb) <= tol && std::max(la, lb) >= -tol) return 1;
    return 2;
}

// Both endpoints possibly within tol of the line: the near-collinear case.
inline bool near_line(double sa, double sb, double ea, double eb, double tol)
{
    return std::fabs(sa) - ea <= tol && std::fabs(sb) - eb <= tol;
}

}  // namespace

void classify_scalar(const StickGeom& g, std::size_t i, const std::uint32_t* js, std::size_t n,
                     double tol, std::uint8_t* out)
{
    const double iat = g.at[i], iax = g.ax[i], iay = g.ay[i];
    const double ibt = g.bt[i], ibx = g.bx[i], iby = g.by[i];
    const double int_ = g.nt[i], inx = g.nx[i], iny = g.ny[i];
    const double ie = kErrScale * g.nn[i];
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t j = js[k];
        const double sa = side(int_, inx, iny, g.at[j], g.ax[j], g.ay[j]);
        const double sb = side(int_, inx, iny, g.bt[j], g.bx[j], g.by[j]);
        const double ta = side(g.nt[j], g.nx[j], g.ny[j], iat, iax, iay);
        const double tb = side(g.nt[j], g.nx[j], g.ny[j], ibt, ibx, iby);
        const double je = kErrScale * g.nn[j];
        const int u = straddle(sa, sb, ie * g.at[j], ie * g.bt[j], tol);
        const int v = straddle(ta, tb, je * iat, je * ibt, tol);
        const bool near = near_line(sa, sb, ie * g.at[j], ie * g.bt[j], tol) ||
                          near_line(ta, tb, je * iat, je * ibt, tol);
        if (near)
            out[k] = kUnsure;
        else if (u == 0 || v == 0)
            out[k] = kApart;
        else if (u == 1 && v == 1)
            out[k] = kMeet;
        else
            out[k] = kUnsure;
    }
}

ClassifyFn classify_best()
{
    static const ClassifyFn fn = [] {
        const char* env = std::getenv("HYPERSTICKS_SIMD");
        if (env && std::strcmp(env, "scalar") == 0) return &classify_scalar;
        return avx2_available() ? &classify_avx2 : &classify_scalar;
    }();
    return fn;
}

const char* classify_best_name()
{
    return classify_best() == &classify_avx2 ? "avx2" : "scalar";
}

}  // namespace hs::kern
