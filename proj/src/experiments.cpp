#include "hypersticks/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <sstream>

#include "hypersticks/embedding.hpp"
#include "hypersticks/parallel.hpp"
#include "hypersticks/percolation.hpp"
#include "hypersticks/persistence.hpp"

#ifndef HYPERSTICKS_VERSION
#define HYPERSTICKS_VERSION "0.0.0"
#endif

namespace hs {

namespace {

constexpr const char* kKindNames[] = {
    "crossing_curve", "lambda_c_bisect", "two_arm_curve", "measure_verify",
    "gw_survival",    "vacant_decay",    "subcritical_domination",
};

const double kSqrt3m1 = std::sqrt(3.0) - 1.0;

bool curve_kind(ExperimentKind k)
{
    return k == ExperimentKind::crossing_curve || k == ExperimentKind::two_arm_curve;
}

std::string join(const std::vector<double>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += format_double(v[i]);
    }
    return out;
}

double parse_num(const std::string& key, const std::string& v)
{
    std::size_t pos = 0;
    double x;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw SpecError(key, "expected a number, got '" + v + "'");
    }
    while (pos < v.size() && std::isspace(static_cast<unsigned char>(v[pos]))) ++pos;
    if (pos != v.size() || !std::isfinite(x)) throw SpecError(key, "expected a number, got '" + v + "'");
    return x;
}

long long parse_int(const std::string& key, const std::string& v)
{
    const double x = parse_num(key, v);
    if (x != std::floor(x) || std::fabs(x) > 9.0e15) throw SpecError(key, "expected an integer, got '" + v + "'");
    return static_cast<long long>(x);
}

std::vector<double> parse_list(const std::string& key, const std::string& v)
{
    std::vector<double> out;
    std::stringstream ss(v);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        const auto b = tok.find_first_not_of(" \t");
        if (b == std::string::npos) throw SpecError(key, "empty list entry in '" + v + "'");
        out.push_back(parse_num(key, tok.substr(b)));
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& v)
{
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    throw SpecError(key, "expected true/false, got '" + v + "'");
}

double frequency(const std::vector<std::uint8_t>& hits, std::size_t skip_group = SIZE_MAX, std::size_t groups = 1)
{
    std::size_t n = 0, k = 0;
    for (std::size_t r = 0; r < hits.size(); ++r) {
        if (skip_group != SIZE_MAX && r % groups == skip_group) continue;
        ++n;
        k += hits[r];
    }
    return n ? static_cast<double>(k) / static_cast<double>(n) : 0.0;
}

std::size_t count_true(const std::vector<std::uint8_t>& v)
{
    std::size_t k = 0;
    for (auto x : v) k += x;
    return k;
}

// Crossing point of f = target between (lo, f_lo) and (hi, f_hi), linear in log lambda.
double log_interp(double lo, double f_lo, double hi, double f_hi, double target)
{
    if (lo <= 0.0) {
        if (f_hi == f_lo) return 0.5 * (lo + hi);
        const double t = std::clamp((target - f_lo) / (f_hi - f_lo), 0.0, 1.0);
        return lo + t * (hi - lo);
    }
    if (f_hi == f_lo) return std::sqrt(lo * hi);
    const double t = std::clamp((target - f_lo) / (f_hi - f_lo), 0.0, 1.0);
    return lo * std::pow(hi / lo, t);
}

struct Evaluated {
    double lambda = 0.0;
    std::vector<std::uint8_t> hit;
    double kept_mean = 0.0;
    std::string status = "ok", message;
};

// min_arms = 1: crossing; 2: two-arm.
Evaluated evaluate(double lambda, double L, double r_in, double R, std::size_t reps, std::uint64_t seed,
                   unsigned threads, std::size_t min_arms)
{
    Evaluated e;
    e.lambda = lambda;
    try {
        const auto out = window_outcomes(lambda, L, r_in, R, reps, seed, threads);
        e.hit.resize(out.size());
        double kept = 0.0;
        for (std::size_t r = 0; r < out.size(); ++r) {
            e.hit[r] = out[r].arms >= min_arms;
            kept += static_cast<double>(out[r].kept);
        }
        e.kept_mean = out.empty() ? 0.0 : kept / static_cast<double>(out.size());
    } catch (const CapExceeded& ex) {
        e.status = "cap_exceeded";
        e.message = ex.what();
    }
    return e;
}

PointRecord to_point(const char* kind, double L, double R, std::size_t reps, std::uint64_t seed, const Evaluated& e)
{
    PointRecord p;
    p.kind = kind;
    p.L = L;
    p.lambda = e.lambda;
    p.R = R;
    p.reps = reps;
    p.seed = seed;
    p.status = e.status;
    p.message = e.message;
    if (e.status == "ok") {
        const std::size_t k = count_true(e.hit);
        p.estimate = static_cast<double>(k) / static_cast<double>(reps);
        p.std_err = binomial_se(k, reps);
        p.extra = {{"hits", static_cast<double>(k)}, {"kept_mean", e.kept_mean}};
    }
    return p;
}

// Threshold crossing on the descending side of a scan (see lambda_u_proxy).
struct ScanState {
    bool armed = false;
    bool done = false;
    std::size_t drop = 0;
};

ThresholdEstimate finish_scan(double L, double R, const std::vector<Evaluated>& ev, const ScanState& st,
                              double threshold)
{
    ThresholdEstimate t;
    t.L = L;
    t.R = R;
    t.iterations = ev.size();
    if (!st.done) {
        t.found = false;
        return t;
    }
    const Evaluated& a = ev[st.drop - 1];
    const Evaluated& b = ev[st.drop];
    const std::size_t reps = a.hit.size();
    t.lo = a.lambda;
    t.hi = b.lambda;
    t.f_lo = frequency(a.hit);
    t.f_hi = frequency(b.hit);
    t.lambda = log_interp(t.lo, t.f_lo, t.hi, t.f_hi, threshold);
    const std::size_t G = std::min<std::size_t>(reps, 20);
    if (G >= 2) {
        t.std_err = jackknife_se(G, [&](std::size_t g) {
            return log_interp(t.lo, frequency(a.hit, g, G), t.hi, frequency(b.hit, g, G), threshold);
        });
    }
    t.scaled = t.lambda * L;
    t.scaled_se = t.std_err * L;
    return t;
}

void step_scan(const std::vector<Evaluated>& ev, ScanState& st, double threshold)
{
    const std::size_t i = ev.size() - 1;
    if (ev[i].status != "ok") return;
    const double f = frequency(ev[i].hit);
    if (f >= threshold) {
        st.armed = true;
    } else if (st.armed && i > 0 && ev[i - 1].status == "ok") {
        st.done = true;
        st.drop = i;
    }
}

PointRecord threshold_point(const char* kind, const ThresholdEstimate& t, std::size_t reps, std::uint64_t seed)
{
    PointRecord p;
    p.kind = kind;
    p.L = t.L;
    p.lambda = t.lambda;
    p.R = t.R;
    p.estimate = t.scaled;
    p.std_err = t.scaled_se;
    p.reps = reps;
    p.seed = seed;
    if (!t.found) {
        p.status = "not_found";
        p.message = "no threshold crossing inside the grid";
    }
    p.extra = {{"lambda_se", t.std_err}, {"lo", t.lo},     {"hi", t.hi},
               {"f_lo", t.f_lo},        {"f_hi", t.f_hi}, {"iterations", static_cast<double>(t.iterations)}};
    return p;
}

}  // namespace

const char* kind_name(ExperimentKind k) { return kKindNames[static_cast<int>(k)]; }

std::optional<ExperimentKind> parse_kind(const std::string& s)
{
    for (int i = 0; i < 7; ++i)
        if (s == kKindNames[i]) return static_cast<ExperimentKind>(i);
    return std::nullopt;
}

std::string format_double(double x)
{
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

void apply_defaults(ExperimentSpec& s)
{
    using K = ExperimentKind;
    if (s.L.empty()) {
        switch (s.kind) {
        case K::gw_survival: s.L = {40.0}; break;
        case K::subcritical_domination: s.L = {1.0}; break;
        case K::measure_verify:
        case K::vacant_decay: s.L = {5.0}; break;
        default: s.L = {10.0}; break;
        }
    }
    if (s.R.empty()) {
        switch (s.kind) {
        case K::measure_verify: s.R = {2.0}; break;
        case K::vacant_decay: s.R = {1.0}; break;
        case K::gw_survival:
        case K::subcritical_domination: break;
        default: s.R = {6.0}; break;
        }
    }
    if (s.lambda.empty() && s.lambda_min <= 0.0 && s.lambda_max <= 0.0) {
        if (s.kind == K::subcritical_domination && s.m.empty()) s.m = {0.5, 0.9};
        if (s.kind == K::gw_survival && s.L.size() == 1) s.lambda = {32.0 * kPi / (kSqrt3m1 * s.L[0] * s.L[0])};
        if (s.kind == K::measure_verify || s.kind == K::vacant_decay) s.lambda = {0.5};
    }
}

void validate(const ExperimentSpec& s)
{
    using K = ExperimentKind;
    if (s.L.empty()) throw SpecError("L", "at least one L is required");
    for (double L : s.L) {
        if (!(L > 0.0) || !std::isfinite(L)) throw SpecError("L", "L must be positive, got " + format_double(L));
        if (s.kind == K::gw_survival && L < 20.0)
            throw SpecError("L", "gw_survival requires L >= 20, got " + format_double(L));
    }
    for (std::size_t i = 0; i < s.lambda.size(); ++i) {
        if (!(s.lambda[i] >= 0.0) || !std::isfinite(s.lambda[i]))
            throw SpecError("lambda", "lambda must be >= 0, got " + format_double(s.lambda[i]));
        if (i > 0 && s.lambda[i] < s.lambda[i - 1]) throw SpecError("lambda", "lambda grid must be ascending");
    }
    if (s.lambda_min < 0.0) throw SpecError("lambda_min", "lambda_min must be >= 0");
    if (s.lambda_max < 0.0) throw SpecError("lambda_max", "lambda_max must be >= 0");
    if (s.lambda_max > 0.0 && !(s.lambda_max > s.lambda_min))
        throw SpecError("lambda_max", "lambda_max must exceed lambda_min");
    if (s.grid == 0) throw SpecError("grid", "empty grid");
    if (s.grid == 1) throw SpecError("grid", "grid needs at least 2 points");
    if (curve_kind(s.kind) && s.lambda.empty()) {
        const bool range = s.lambda_min > 0.0 || s.lambda_max > 0.0;
        if (range && !(s.lambda_min > 0.0)) throw SpecError("lambda_min", "grid range needs lambda_min > 0");
        if (range && !(s.lambda_max > 0.0)) throw SpecError("lambda_max", "grid range needs lambda_max > 0");
    }
    if ((s.kind == K::measure_verify || s.kind == K::vacant_decay || s.kind == K::gw_survival) && s.lambda.empty())
        throw SpecError("lambda", std::string(kind_name(s.kind)) + " needs an explicit lambda");
    for (double m : s.m)
        if (!(m >= 0.0 && m < 1.0)) throw SpecError("m", "offspring mean must lie in [0, 1), got " + format_double(m));
    if (s.kind == K::subcritical_domination) {
        if (s.m.empty() && s.lambda.empty()) throw SpecError("m", "subcritical_domination needs m or lambda");
        for (double L : s.L)
            for (double lam : s.lambda)
                if (offspring_mean(lam, L) >= 1.0)
                    throw SpecError("lambda", "offspring mean 2 lambda L^2/pi must be < 1 for subcritical_domination");
    }
    for (double R : s.R) {
        if (!(R > 0.0) || !std::isfinite(R)) throw SpecError("R", "R must be positive, got " + format_double(R));
        if (curve_kind(s.kind) || s.kind == K::lambda_c_bisect)
            if (!(s.r_in < R)) throw SpecError("r_in", "r_in must be smaller than R");
    }
    if (!(s.r_in >= 0.0) || !std::isfinite(s.r_in)) throw SpecError("r_in", "r_in must be >= 0");
    if (s.reps < 1) throw SpecError("reps", "reps must be >= 1");
    if (s.depth < 1) throw SpecError("depth", "depth must be >= 1");
    if (s.n < 1) throw SpecError("n", "n must be >= 1");
    if (!(s.target_p > 0.0 && s.target_p < 1.0)) throw SpecError("target_p", "target_p must lie in (0, 1)");
    if (!(s.threshold > 0.0 && s.threshold < 1.0)) throw SpecError("threshold", "threshold must lie in (0, 1)");
    if (!std::isfinite(s.ray_angle)) throw SpecError("ray_angle", "ray_angle must be finite");
}

std::vector<double> geometric_grid(double lo, double hi, std::size_t n)
{
    if (n == 0) return {};
    if (n == 1) return {lo};
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n - 1);
        g[i] = lo > 0.0 ? lo * std::pow(hi / lo, t) : lo + t * (hi - lo);
    }
    g.back() = hi;
    return g;
}

std::vector<double> lambda_grid(const ExperimentSpec& s, double L)
{
    if (!s.lambda.empty()) return s.lambda;
    const std::size_t def = s.kind == ExperimentKind::two_arm_curve ? 16 : 12;
    const std::size_t n = s.grid > 0 ? static_cast<std::size_t>(s.grid) : def;
    if (s.lambda_min > 0.0 && s.lambda_max > 0.0) return geometric_grid(s.lambda_min, s.lambda_max, n);
    if (s.kind == ExperimentKind::two_arm_curve) return geometric_grid(0.25 * kPi / L, 10.0 * std::sqrt(2.0) * kPi / L, n);
    return geometric_grid(0.25 * kPi / (L * L), 64.0 * kPi / (kSqrt3m1 * L * L), n);
}

std::vector<std::pair<std::string, std::string>> spec_items(const ExperimentSpec& s)
{
    return {
        {"kind", kind_name(s.kind)},
        {"L", join(s.L)},
        {"lambda", join(s.lambda)},
        {"lambda_min", format_double(s.lambda_min)},
        {"lambda_max", format_double(s.lambda_max)},
        {"grid", std::to_string(s.grid)},
        {"m", join(s.m)},
        {"R", join(s.R)},
        {"r_in", format_double(s.r_in)},
        {"depth", std::to_string(s.depth)},
        {"reps", std::to_string(s.reps)},
        {"seed", std::to_string(s.seed)},
        {"n", std::to_string(s.n)},
        {"target_p", format_double(s.target_p)},
        {"threshold", format_double(s.threshold)},
        {"ray_angle", format_double(s.ray_angle)},
        {"control", s.control ? "true" : "false"},
        {"threads", std::to_string(s.threads)},
        {"out", s.out},
    };
}

void set_spec_item(ExperimentSpec& s, const std::string& key_in, const std::string& v)
{
    std::string key = key_in;
    std::replace(key.begin(), key.end(), '-', '_');
    if (key == "kind") {
        auto k = parse_kind(v);
        if (!k) throw SpecError(key, "unknown kind '" + v + "'");
        s.kind = *k;
    } else if (key == "L") {
        s.L = parse_list(key, v);
    } else if (key == "lambda") {
        s.lambda = parse_list(key, v);
    } else if (key == "lambda_min") {
        s.lambda_min = parse_num(key, v);
    } else if (key == "lambda_max") {
        s.lambda_max = parse_num(key, v);
    } else if (key == "grid") {
        const long long g = parse_int(key, v);
        if (g < -1 || g > 100000) throw SpecError(key, "grid out of range");
        s.grid = static_cast<int>(g);
    } else if (key == "m") {
        s.m = parse_list(key, v);
    } else if (key == "R") {
        s.R = parse_list(key, v);
    } else if (key == "r_in") {
        s.r_in = parse_num(key, v);
    } else if (key == "depth") {
        const long long d = parse_int(key, v);
        if (d < 1 || d > 60) throw SpecError(key, "depth must lie in [1, 60]");
        s.depth = static_cast<int>(d);
    } else if (key == "reps") {
        const long long r = parse_int(key, v);
        if (r < 1) throw SpecError(key, "reps must be >= 1");
        s.reps = static_cast<std::size_t>(r);
    } else if (key == "seed") {
        std::uint64_t x = 0;
        const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
        if (r.ec != std::errc() || r.ptr != v.data() + v.size())
            throw SpecError(key, "seed must be an unsigned 64-bit integer, got '" + v + "'");
        s.seed = x;
    } else if (key == "n") {
        const long long n = parse_int(key, v);
        if (n < 1) throw SpecError(key, "n must be >= 1");
        s.n = static_cast<std::size_t>(n);
    } else if (key == "target_p") {
        s.target_p = parse_num(key, v);
    } else if (key == "threshold") {
        s.threshold = parse_num(key, v);
    } else if (key == "ray_angle") {
        s.ray_angle = parse_num(key, v);
    } else if (key == "control") {
        s.control = parse_bool(key, v);
    } else if (key == "threads") {
        const long long t = parse_int(key, v);
        if (t < 0 || t > 4096) throw SpecError(key, "threads must lie in [0, 4096]");
        s.threads = static_cast<unsigned>(t);
    } else if (key == "out") {
        s.out = v;
    } else {
        throw SpecError(key, "unknown key '" + key_in + "'");
    }
}

// --- window crossing ---

WindowOutcome window_outcome(double lambda, double L, double r_in, double R, std::uint64_t seed, std::uint64_t rep)
{
    const ProcessConfig c{lambda, L, R, seed};
    const StickSample s = sample_window(c, rep, true);
    const ClusterLabeling lab = build_clusters(s.sticks);
    return {two_arm_count(s.sticks, lab, r_in, R), s.sticks.size()};
}

std::vector<WindowOutcome> window_outcomes(double lambda, double L, double r_in, double R, std::size_t reps,
                                           std::uint64_t seed, unsigned threads)
{
    std::vector<WindowOutcome> out(reps);
    parallel_for(reps, threads, [&](std::size_t r) { out[r] = window_outcome(lambda, L, r_in, R, seed, r); });
    return out;
}

std::vector<PointRecord> crossing_curve(double L, const std::vector<double>& grid, double r_in, double R,
                                        std::size_t reps, std::uint64_t seed, unsigned threads)
{
    std::vector<PointRecord> pts;
    for (double lam : grid)
        pts.push_back(to_point("crossing_curve", L, R, reps, seed, evaluate(lam, L, r_in, R, reps, seed, threads, 1)));
    return pts;
}

std::vector<PointRecord> two_arm_curve(double L, const std::vector<double>& grid, double r_in, double R,
                                       std::size_t reps, std::uint64_t seed, unsigned threads)
{
    std::vector<PointRecord> pts;
    for (double lam : grid)
        pts.push_back(to_point("two_arm_curve", L, R, reps, seed, evaluate(lam, L, r_in, R, reps, seed, threads, 2)));
    return pts;
}

ThresholdEstimate lambda_c_bisect(double L, double R, double r_in, std::size_t reps, double target_p,
                                  std::uint64_t seed, unsigned threads, double lo, double hi)
{
    if (!(target_p > 0.0 && target_p < 1.0)) throw std::invalid_argument("target_p must lie in (0, 1)");
    if (reps < 1) throw std::invalid_argument("reps must be >= 1");
    if (lo <= 0.0) lo = 0.25 * kPi / (L * L);
    if (hi <= 0.0) hi = 64.0 * kPi / (kSqrt3m1 * L * L);
    if (!(hi > lo)) throw std::invalid_argument("bisection bracket must satisfy lo < hi");

    ThresholdEstimate t;
    t.L = L;
    t.R = R;
    auto run = [&](double lam) {
        Evaluated e = evaluate(lam, L, r_in, R, reps, seed, threads, 1);
        if (e.status != "ok") throw CapExceeded(e.message);
        PointRecord p = to_point("lambda_c_step", L, R, reps, seed, e);
        p.extra.emplace_back("iteration", static_cast<double>(t.steps.size()));
        t.steps.push_back(p);
        return e;
    };
    Evaluated a = run(lo), b = run(hi);
    double fa = frequency(a.hit), fb = frequency(b.hit);
    if (!(fa < target_p) || !(fb >= target_p)) {
        std::ostringstream os;
        os << "bracket [" << lo << ", " << hi << "] does not straddle target " << target_p
           << " (crossing frequency " << fa << " at lo, " << fb << " at hi)";
        throw NonBracketing(os.str());
    }
    std::size_t it = 0;
    while (it < 25 && b.lambda / a.lambda - 1.0 > 0.05) {
        const double mid = std::sqrt(a.lambda * b.lambda);
        Evaluated m = run(mid);
        const double fm = frequency(m.hit);
        if (fm < target_p) {
            a = std::move(m);
            fa = fm;
        } else {
            b = std::move(m);
            fb = fm;
        }
        ++it;
    }
    t.iterations = it;
    t.lo = a.lambda;
    t.hi = b.lambda;
    t.f_lo = fa;
    t.f_hi = fb;
    t.lambda = log_interp(t.lo, fa, t.hi, fb, target_p);
    const std::size_t G = std::min<std::size_t>(reps, 20);
    if (G >= 2) {
        t.std_err = jackknife_se(G, [&](std::size_t g) {
            return log_interp(t.lo, frequency(a.hit, g, G), t.hi, frequency(b.hit, g, G), target_p);
        });
    }
    t.scaled = t.lambda * L * L;
    t.scaled_se = t.std_err * L * L;
    return t;
}

ThresholdEstimate lambda_u_proxy(double L, const std::vector<double>& grid, double r_in, double R, std::size_t reps,
                                 std::uint64_t seed, double threshold, unsigned threads)
{
    std::vector<Evaluated> ev;
    ScanState st;
    std::vector<PointRecord> steps;
    for (double lam : grid) {
        ev.push_back(evaluate(lam, L, r_in, R, reps, seed, threads, 2));
        steps.push_back(to_point("two_arm_curve", L, R, reps, seed, ev.back()));
        step_scan(ev, st, threshold);
        if (st.done) break;
    }
    ThresholdEstimate t = finish_scan(L, R, ev, st, threshold);
    t.steps = std::move(steps);
    return t;
}

LineFit scaling_fit(const std::vector<double>& L, const std::vector<double>& estimate)
{
    if (L.size() != estimate.size()) throw std::invalid_argument("scaling_fit: size mismatch");
    std::vector<double> distinct = L;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 3) throw std::invalid_argument("scaling_fit needs at least 3 distinct L values");
    for (std::size_t i = 0; i < L.size(); ++i)
        if (!(L[i] > 0.0) || !(estimate[i] > 0.0)) throw std::invalid_argument("scaling_fit needs positive values");
    return fit_loglog(L, estimate);
}

// --- sampler verification ---

std::vector<TripleBox> default_boxes(double L, double rho_max)
{
    std::vector<TripleBox> b;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 4; ++j)
            b.push_back({0.5 * rho_max * i, 0.5 * rho_max * (i + 1), 0.25 * kPi * j, 0.25 * kPi * (j + 1),
                         -0.5 * L, 0.5 * L});
    return b;
}

MeasureResult measure_verify(double lambda, double L, double rho_max, const std::vector<TripleBox>& boxes,
                             std::size_t n_target, std::uint64_t seed, double ray_angle, bool control,
                             unsigned threads)
{
    if (!(lambda > 0.0)) throw std::invalid_argument("measure_verify needs lambda > 0");
    if (!(rho_max > 0.0)) throw std::invalid_argument("measure_verify needs rho_max > 0");
    if (boxes.empty()) throw std::invalid_argument("measure_verify needs at least one box");
    for (const auto& b : boxes) {
        validate(b, L);
        if (!(mu_box(b) > 0.0)) throw std::invalid_argument("box with zero measure");
    }
    for (std::size_t i = 0; i < boxes.size(); ++i)
        for (std::size_t j = i + 1; j < boxes.size(); ++j) {
            const auto& a = boxes[i];
            const auto& b = boxes[j];
            if (a.rho1 < b.rho2 && b.rho1 < a.rho2 && a.phi1 < b.phi2 && b.phi1 < a.phi2 && a.r1 < b.r2 &&
                b.r1 < a.r2)
                throw std::invalid_argument("boxes must be disjoint");
        }

    const double per_rep = 2.0 / kPi * lambda * L * rho_max;
    const std::size_t reps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(n_target / per_rep)));
    const std::size_t nb = boxes.size();
    std::vector<std::uint32_t> counts(reps * nb, 0);
    std::vector<std::uint32_t> hits(reps, 0);
    const ProcessConfig c{lambda, L, rho_max, seed};

    parallel_for(reps, threads, [&](std::size_t r) {
        std::vector<HitTriple> ts;
        if (control) {
            for (const auto& d : draw_restricted(c, 0.0, rho_max, ray_angle, r, false, PhiLaw::uniform))
                ts.push_back(d.triple);
        } else {
            const StickSample s = sample_window(c, r, true);
            for (const Stick& st : s.sticks) {
                const auto t = hit_triple(st, ray_angle);
                if (t && t->rho_prime <= rho_max) ts.push_back(*t);
            }
        }
        hits[r] = static_cast<std::uint32_t>(ts.size());
        for (const auto& t : ts)
            for (std::size_t k = 0; k < nb; ++k)
                if (box_contains(boxes[k], t)) {
                    ++counts[r * nb + k];
                    break;
                }
    });

    MeasureResult m;
    m.control = control;
    m.replicates = reps;
    for (auto h : hits) m.hits += h;
    for (std::size_t k = 0; k < nb; ++k) {
        BoxResult br;
        br.box = boxes[k];
        br.mu = mu_box(boxes[k]);
        for (std::size_t r = 0; r < reps; ++r) br.count += counts[r * nb + k];
        br.expected = lambda * br.mu * static_cast<double>(reps);
        br.z = (static_cast<double>(br.count) - br.expected) / std::sqrt(br.expected);
        m.chi2 += br.z * br.z;
        m.max_abs_z = std::max(m.max_abs_z, std::fabs(br.z));
        m.boxes.push_back(br);
    }
    m.p_value = chi2_sf(m.chi2, static_cast<double>(nb));
    m.pass = m.max_abs_z < 4.0 && m.p_value > 0.001;
    return m;
}

// --- GW embedding ---

GwResult gw_survival_experiment(double L, double lambda, int depth, std::size_t trees, std::uint64_t seed,
                                unsigned threads)
{
    if (!(L >= 20.0)) throw std::invalid_argument("gw_survival requires L >= 20");
    if (depth < 1) throw std::invalid_argument("depth must be >= 1");
    if (trees < 1) throw std::invalid_argument("trees must be >= 1");

    struct TreeOut {
        bool failed = false;
        std::string failure;
        int survival_depth = 0;
        std::vector<std::size_t> gens;
        std::size_t trials = 0, successes = 0;
    };
    std::vector<TreeOut> out(trees);
    parallel_for(trees, threads, [&](std::size_t i) {
        try {
            const EmbeddingTree t = gw_embedding_simulate(lambda, L, depth, seed, i);
            out[i].survival_depth = t.survival_depth;
            out[i].gens = t.generation_sizes;
            out[i].trials = t.child_trials;
            out[i].successes = t.child_successes;
        } catch (const GeometryCheckError& e) {
            out[i].failed = true;
            out[i].failure = e.what();
        }
    });

    GwResult g;
    g.L = L;
    g.lambda = lambda;
    g.q = embedding_success_prob(lambda, L);
    g.depth = depth;
    g.trees = trees;
    g.oracle_fixed_point = gw_survival_prob(g.q);
    g.oracle_depth = gw_survival_to_depth(g.q, depth);
    std::vector<std::vector<double>> gens(static_cast<std::size_t>(depth) + 1);
    for (const auto& t : out) {
        if (t.failed) {
            if (g.first_failure.empty()) g.first_failure = t.failure;
            ++g.geometry_failures;
            continue;
        }
        if (t.survival_depth >= depth) ++g.survived;
        g.child_trials += t.trials;
        g.child_successes += t.successes;
        for (std::size_t d = 0; d < gens.size(); ++d)
            gens[d].push_back(d < t.gens.size() ? static_cast<double>(t.gens[d]) : 0.0);
    }
    const std::size_t ok = trees - g.geometry_failures;
    if (ok > 0) {
        g.survival = static_cast<double>(g.survived) / static_cast<double>(ok);
        g.survival_se = binomial_se(g.survived, ok);
    }
    if (g.child_trials > 0) {
        g.child_freq = static_cast<double>(g.child_successes) / static_cast<double>(g.child_trials);
        g.child_se = binomial_se(g.child_successes, g.child_trials);
    }
    for (const auto& v : gens) {
        const MeanSe ms = mean_se(v);
        g.generation_mean.push_back(ms.mean);
        g.generation_se.push_back(ms.se);
    }
    return g;
}

// --- vacant line ---

VacantResult vacant_decay(double lambda, double L, double R, std::size_t reps, std::uint64_t seed, unsigned threads)
{
    if (reps < 1) throw std::invalid_argument("reps must be >= 1");
    std::vector<std::uint8_t> vac(reps, 0);
    const ProcessConfig c{lambda, L, R, seed};
    parallel_for(reps, threads, [&](std::size_t r) {
        const StickSample s = sample_window(c, r, true);
        bool hit = false;
        for (const Stick& st : s.sticks) {
            const auto t = hit_triple(st, 0.0);
            if (t && t->rho_prime <= R) {
                hit = true;
                break;
            }
        }
        vac[r] = !hit;
    });
    VacantResult v;
    v.lambda = lambda;
    v.L = L;
    v.R = R;
    v.reps = reps;
    v.vacant = count_true(vac);
    v.freq = static_cast<double>(v.vacant) / static_cast<double>(reps);
    v.se = binomial_se(v.vacant, reps);
    v.predicted = vacant_line_prob(lambda, L, R);
    const double sd = std::sqrt(v.predicted * (1.0 - v.predicted) / static_cast<double>(reps));
    v.z = sd > 0.0 ? (v.freq - v.predicted) / sd : 0.0;
    return v;
}

// --- dispatch ---

std::string version_tag() { return std::string("hypersticks ") + HYPERSTICKS_VERSION; }

namespace {

struct Emitter {
    ResultRecord& rec;
    ResultSink* sink;
    void point(PointRecord p)
    {
        if (sink) sink->point(p);
        rec.points.push_back(std::move(p));
    }
    void step(PointRecord p)
    {
        if (sink) sink->step(p);
        rec.steps.push_back(std::move(p));
    }
};

std::string suffix(double L, double R)
{
    std::string s = "_L" + format_double(L);
    if (R > 0.0) s += "_R" + format_double(R);
    return s;
}

void add_slope(ResultRecord& rec, const std::vector<double>& Ls, const std::vector<double>& lam, const char* key)
{
    std::vector<double> d = Ls;
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end()), d.end());
    if (d.size() < 3 || Ls.size() != lam.size()) return;
    const LineFit f = scaling_fit(Ls, lam);
    rec.summary.emplace_back(std::string(key) + "_slope", f.slope);
    rec.summary.emplace_back(std::string(key) + "_slope_se", f.slope_se);
}

}  // namespace

ResultRecord run_experiment(const ExperimentSpec& spec_in, ResultSink* sink)
{
    using K = ExperimentKind;
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentSpec spec = spec_in;
    apply_defaults(spec);
    validate(spec);

    ResultRecord rec;
    rec.spec = spec;
    rec.version = version_tag();
    if (sink) sink->header(spec, rec.version);
    Emitter em{rec, sink};
    const unsigned th = spec.threads;

    switch (spec.kind) {
    case K::crossing_curve:
    case K::two_arm_curve: {
        const bool two = spec.kind == K::two_arm_curve;
        std::vector<double> fitL, fitLam;
        for (double L : spec.L)
            for (double R : spec.R) {
                std::vector<Evaluated> ev;
                ScanState st;
                for (double lam : lambda_grid(spec, L)) {
                    ev.push_back(evaluate(lam, L, spec.r_in, R, spec.reps, spec.seed, th, two ? 2 : 1));
                    em.point(to_point(kind_name(spec.kind), L, R, spec.reps, spec.seed, ev.back()));
                    if (two && !st.done) step_scan(ev, st, spec.threshold);
                }
                if (!two) continue;
                const ThresholdEstimate t = finish_scan(L, R, ev, st, spec.threshold);
                const std::string sfx = suffix(L, R);
                rec.summary.emplace_back("lambda_u" + sfx, t.found ? t.lambda : NAN);
                rec.summary.emplace_back("lambda_u_se" + sfx, t.found ? t.std_err : NAN);
                rec.summary.emplace_back("lambda_u_scaled" + sfx, t.found ? t.scaled : NAN);
                if (t.found && spec.R.size() == 1) {
                    fitL.push_back(L);
                    fitLam.push_back(t.lambda);
                }
            }
        if (two && fitL.size() == spec.L.size()) add_slope(rec, fitL, fitLam, "lambda_u");
        break;
    }
    case K::lambda_c_bisect: {
        std::vector<double> fitL, fitLam;
        for (double L : spec.L)
            for (double R : spec.R) {
                ThresholdEstimate t;
                try {
                    t = lambda_c_bisect(L, R, spec.r_in, spec.reps, spec.target_p, spec.seed, th, spec.lambda_min,
                                        spec.lambda_max);
                } catch (const NonBracketing& e) {
                    PointRecord p;
                    p.kind = kind_name(spec.kind);
                    p.L = L;
                    p.R = R;
                    p.reps = spec.reps;
                    p.seed = spec.seed;
                    p.status = "non_bracketing";
                    p.message = e.what();
                    em.point(p);
                    continue;
                }
                for (auto& s : t.steps) em.step(s);
                em.point(threshold_point(kind_name(spec.kind), t, spec.reps, spec.seed));
                if (spec.R.size() == 1) {
                    fitL.push_back(L);
                    fitLam.push_back(t.lambda);
                }
            }
        if (fitL.size() == spec.L.size()) add_slope(rec, fitL, fitLam, "lambda_c");
        break;
    }
    case K::measure_verify: {
        const auto boxes_for = [](double L, double R) { return default_boxes(L, R); };
        bool all = true;
        for (double L : spec.L)
            for (double lam : spec.lambda)
                for (double R : spec.R) {
                    const MeasureResult m = measure_verify(lam, L, R, boxes_for(L, R), spec.n, spec.seed,
                                                           spec.ray_angle, spec.control, th);
                    for (const auto& b : m.boxes) {
                        PointRecord p;
                        p.kind = kind_name(spec.kind);
                        p.L = L;
                        p.lambda = lam;
                        p.R = R;
                        p.reps = m.replicates;
                        p.seed = spec.seed;
                        p.estimate = static_cast<double>(b.count) / static_cast<double>(m.replicates);
                        p.std_err = std::sqrt(static_cast<double>(b.count)) / static_cast<double>(m.replicates);
                        p.extra = {{"rho1", b.box.rho1}, {"rho2", b.box.rho2}, {"phi1", b.box.phi1},
                                   {"phi2", b.box.phi2}, {"r1", b.box.r1},     {"r2", b.box.r2},
                                   {"count", static_cast<double>(b.count)},    {"expected", b.expected},
                                   {"z", b.z}};
                        em.point(p);
                    }
                    const std::string sfx = suffix(L, R);
                    rec.summary.emplace_back("chi2" + sfx, m.chi2);
                    rec.summary.emplace_back("dof" + sfx, static_cast<double>(m.boxes.size()));
                    rec.summary.emplace_back("p_value" + sfx, m.p_value);
                    rec.summary.emplace_back("max_abs_z" + sfx, m.max_abs_z);
                    rec.summary.emplace_back("hits" + sfx, static_cast<double>(m.hits));
                    rec.summary.emplace_back("pass" + sfx, m.pass ? 1.0 : 0.0);
                    all = all && m.pass;
                }
        rec.summary.emplace_back("pass", all ? 1.0 : 0.0);
        break;
    }
    case K::gw_survival: {
        for (double L : spec.L)
            for (double lam : spec.lambda) {
                const GwResult g = gw_survival_experiment(L, lam, spec.depth, spec.reps, spec.seed, th);
                PointRecord p;
                p.kind = kind_name(spec.kind);
                p.L = L;
                p.lambda = lam;
                p.reps = spec.reps;
                p.seed = spec.seed;
                p.estimate = g.survival;
                p.std_err = g.survival_se;
                if (g.geometry_failures > 0) {
                    p.status = "geometry_failures";
                    p.message = g.first_failure;
                }
                p.extra = {{"q", g.q},
                           {"depth", static_cast<double>(g.depth)},
                           {"oracle_fixed_point", g.oracle_fixed_point},
                           {"oracle_depth", g.oracle_depth},
                           {"child_freq", g.child_freq},
                           {"child_se", g.child_se},
                           {"child_trials", static_cast<double>(g.child_trials)},
                           {"geometry_failures", static_cast<double>(g.geometry_failures)}};
                for (std::size_t d = 1; d < g.generation_mean.size(); ++d) {
                    p.extra.emplace_back("gen" + std::to_string(d) + "_mean", g.generation_mean[d]);
                    p.extra.emplace_back("gen" + std::to_string(d) + "_se", g.generation_se[d]);
                }
                em.point(p);
            }
        break;
    }
    case K::vacant_decay: {
        for (double L : spec.L)
            for (double lam : spec.lambda)
                for (double R : spec.R) {
                    const VacantResult v = vacant_decay(lam, L, R, spec.reps, spec.seed, th);
                    PointRecord p;
                    p.kind = kind_name(spec.kind);
                    p.L = L;
                    p.lambda = lam;
                    p.R = R;
                    p.reps = spec.reps;
                    p.seed = spec.seed;
                    p.estimate = v.freq;
                    p.std_err = v.se;
                    p.extra = {{"vacant", static_cast<double>(v.vacant)},
                               {"predicted", v.predicted},
                               {"alpha", alpha_exponent(lam, L)},
                               {"z", v.z}};
                    em.point(p);
                }
        break;
    }
    case K::subcritical_domination: {
        for (double L : spec.L) {
            std::vector<double> lams = spec.lambda;
            for (double m : spec.m) lams.push_back(m * kPi / (2.0 * L * L));
            for (double lam : lams) {
                const SubcriticalStats st = subcritical_cluster_stats(lam, L, spec.reps, spec.seed, 30.0, th);
                PointRecord p;
                p.kind = kind_name(spec.kind);
                p.L = L;
                p.lambda = lam;
                p.reps = spec.reps;
                p.seed = spec.seed;
                p.estimate = st.mean_size;
                p.std_err = st.stderr_size;
                p.extra = {{"m", st.m},
                           {"gw_bound", st.gw_bound},
                           {"truncated", static_cast<double>(st.truncated)},
                           {"max_size", static_cast<double>(st.max_size)},
                           {"mean_reach", st.mean_reach}};
                em.point(p);
            }
        }
        break;
    }
    }

    if (sink) sink->summary(rec.summary);
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (sink) {
        sink->timing(rec.wall_seconds);
        sink->finish(rec);
    }
    return rec;
}

}  // namespace hs
