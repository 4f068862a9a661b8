#include "hypersticks/stickproc.hpp"

#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>


namespace hs {

void validate(const ProcessConfig& c)
{
    if (!(c.lambda >= 0.0) || !std::isfinite(c.lambda)) throw std::invalid_argument("lambda must be >= 0");
    if (!(c.L > 0.0) || !std::isfinite(c.L)) throw std::invalid_argument("L must be positive");
    if (!(c.window_radius > 0.0) || !std::isfinite(c.window_radius))
        throw std::invalid_argument("window radius must be positive");
}

void validate(const TripleBox& b, double L)
{
    const double h = 0.5 * L;
    if (!(b.rho1 >= 0 && b.rho1 < b.rho2)) throw std::invalid_argument("box: bad rho' interval");
    if (!(b.phi1 >= 0 && b.phi1 < b.phi2 && b.phi2 <= kPi)) throw std::invalid_argument("box: bad phi interval");
    if (!(b.r1 >= -h && b.r1 < b.r2 && b.r2 <= h)) throw std::invalid_argument("box: bad r interval");
}

double mu_box(const TripleBox& b)
{
    return (b.rho2 - b.rho1) * (b.r2 - b.r1) * (std::cos(b.phi1) - std::cos(b.phi2)) / kPi;
}

bool box_contains(const TripleBox& b, const HitTriple& t)
{
    return t.rho_prime >= b.rho1 && t.rho_prime < b.rho2 && t.varphi >= b.phi1 && t.varphi < b.phi2 &&
           t.r >= b.r1 && t.r < b.r2;
}

double max_expected_sticks()
{
    if (const char* env = std::getenv("HYPERSTICKS_MAX_STICKS")) {
        char* end = nullptr;
        const double v = std::strtod(env, &end);
        if (end != env && v > 0) return v;
    }
    return 5e7;
}

namespace {

void check_cap(double expected)
{
    const double cap = max_expected_sticks();
    if (expected > cap) {
        std::ostringstream os;
        os << "expected stick count " << expected << " exceeds the cap " << cap
           << " (set HYPERSTICKS_MAX_STICKS to raise it)";
        throw CapExceeded(os.str());
    }
}

// Distance from o to l_L((rho, .), phi), without building the stick.
double origin_distance(double rho, double phi, double h)
{
    const double sh = std::sinh(rho);
    const double x = -sh * std::cos(phi), y = sh * std::sin(phi);
    if (std::fabs(std::asinh(x / std::sqrt(1.0 + y * y))) <= h) return std::asinh(std::fabs(y));
    const double psi = std::min(phi, kPi - phi);
    const double a = std::sinh(0.5 * (rho - h)), s = std::sin(0.5 * psi);
    return 2.0 * std::asinh(std::sqrt(a * a + sh * std::sinh(h) * s * s));
}

}  // namespace

StickSample sample_window(const ProcessConfig& c, std::uint64_t replicate, bool prune_outside)
{
    validate(c);
    StickSample out;
    out.config = c;
    const double h = 0.5 * c.L;
    const double R = c.window_radius + h;
    out.sample_radius = R;
    const double expected = c.lambda * ball_volume(R);
    check_cap(expected);

    Stream rng(c.seed, replicate, Role::window);
    const std::uint64_t n = poisson_quantile(rng.uniform(), expected);
    out.realized_count = n;
    out.sticks.reserve(prune_outside ? n / 8 + 16 : n);
    const double sr = std::sinh(0.5 * R);
    for (std::uint64_t k = 0; k < n; ++k) {
        const double rho = 2.0 * std::asinh(std::sqrt(rng.uniform()) * sr);
        const double theta = kTwoPi * rng.uniform();
        const double phi = kPi * rng.uniform();
        if (prune_outside && rho > c.window_radius && origin_distance(rho, phi, h) > c.window_radius) continue;
        out.sticks.push_back(make_stick(make_point(rho, theta), phi, c.L));
    }
    return out;
}

std::vector<RestrictedDraw> draw_restricted(const ProcessConfig& c, double rho_lo, double rho_hi,
                                            double ray_angle, std::uint64_t replicate, bool full_geodesic,
                                            PhiLaw law, std::uint64_t sub, Role role)
{
    validate(c);
    if (!(rho_lo >= 0 && rho_hi > rho_lo)) throw std::invalid_argument("restricted sampler: bad rho range");
    const double sides = full_geodesic ? 2.0 : 1.0;
    const double expected = sides * 2.0 / kPi * c.lambda * c.L * (rho_hi - rho_lo);
    check_cap(expected);
    Stream rng(c.seed, replicate, role, sub);
    const std::uint64_t n = poisson_quantile(rng.uniform(), expected);
    std::vector<RestrictedDraw> out;
    out.reserve(n);
    for (std::uint64_t k = 0; k < n; ++k) {
        RestrictedDraw d;
        d.triple.rho_prime = rho_lo + (rho_hi - rho_lo) * rng.uniform();
        const double u = rng.uniform();
        d.triple.varphi = law == PhiLaw::sine ? std::acos(1.0 - 2.0 * u) : kPi * u;
        if (d.triple.varphi >= kPi) d.triple.varphi = 0.0;
        d.triple.r = c.L * (rng.uniform() - 0.5);
        d.ray_angle = ray_angle;
        if (full_geodesic && rng.uniform() < 0.5) d.ray_angle = ray_angle + kPi;
        out.push_back(d);
    }
    return out;
}

StickSample sample_restricted(const ProcessConfig& c, double rho_max, double ray_angle, std::uint64_t replicate,
                              bool full_geodesic, PhiLaw law)
{
    const auto draws = draw_restricted(c, 0.0, rho_max, ray_angle, replicate, full_geodesic, law);
    StickSample out;
    out.config = c;
    out.realized_count = draws.size();
    out.sample_radius = rho_max + c.L;
    out.sticks.reserve(draws.size());
    for (const auto& d : draws) out.sticks.push_back(stick_from_triple(d.triple, c.L, d.ray_angle));
    return out;
}

Stick stick_from_triple(const HitTriple& t, double L, double ray_angle)
{
    const double rp = t.rho_prime;
    const double phi = t.varphi;
    auto along = [&](double off) {
        return off >= 0 ? from_frame(rp, ray_angle, off, phi) : from_frame(rp, ray_angle, -off, phi + kPi);
    };
    const HPoint c = along(t.r);
    double dir;
    if (c.rho == 0.0 && rp == 0.0) {
        dir = ray_angle + phi;
    } else {
        // direction at the centre towards a point one unit back along the stick
        dir = direction_at(c, along(t.r - 1.0));
    }
    return make_stick(c, dir, L);
}

double offspring_mean(double lambda, double L) { return 2.0 * lambda * L * L / kPi; }

double embedding_success_prob(double lambda, double L)
{
    return -std::expm1(-lambda * (std::sqrt(3.0) - 1.0) * L * L / (32.0 * kPi));
}

double vacant_line_prob(double lambda, double L, double R) { return std::exp(-alpha_exponent(lambda, L) * R); }

double alpha_exponent(double lambda, double L) { return 2.0 / kPi * lambda * L; }

void write_sample(std::ostream& os, const StickSample& s)
{
    os << "# hypersticks-sample v1\n";
    os << std::setprecision(17);
    os << "# lambda=" << s.config.lambda << " L=" << s.config.L << " window_radius=" << s.config.window_radius
       << " seed=" << s.config.seed << " realized_count=" << s.realized_count
       << " sample_radius=" << s.sample_radius << '\n';
    os << "# center_rho center_theta phi L\n";
    for (const auto& st : s.sticks)
        os << st.center.rho << ' ' << st.center.theta << ' ' << st.phi << ' ' << st.length << '\n';
}

StickSample read_sample(std::istream& is)
{
    StickSample s;
    std::string line;
    if (!std::getline(is, line) || line != "# hypersticks-sample v1")
        throw std::runtime_error("read_sample: missing or unknown header");
    if (!std::getline(is, line)) throw std::runtime_error("read_sample: truncated header");
    {
        std::istringstream hs(line.substr(1));
        std::string kv;
        while (hs >> kv) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) continue;
            const std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
            if (k == "lambda") s.config.lambda = std::stod(v);
            else if (k == "L") s.config.L = std::stod(v);
            else if (k == "window_radius") s.config.window_radius = std::stod(v);
            else if (k == "seed") s.config.seed = std::stoull(v);
            else if (k == "realized_count") s.realized_count = std::stoull(v);
            else if (k == "sample_radius") s.sample_radius = std::stod(v);
        }
    }
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        double rho, theta, phi, L;
        if (!(ls >> rho >> theta >> phi >> L)) throw std::runtime_error("read_sample: bad record: " + line);
        s.sticks.push_back(make_stick(make_point(rho, theta), phi, L));
    }
    return s;
}

}  // namespace hs
