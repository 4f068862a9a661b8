// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
//   acceptance [--only N[,N...]] [--threads T] [--seed S]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "hypersticks/embedding.hpp"
#include "hypersticks/experiments.hpp"
#include "hypersticks/parallel.hpp"
#include "hypersticks/percolation.hpp"
#include "hypersticks/persistence.hpp"
#include "hypersticks/stats.hpp"
#include "hypersticks/stickproc.hpp"
#include "oracles.hpp"

using namespace hs;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

unsigned g_threads = 1;
std::uint64_t g_seed = 20240607;

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...)
{
    char buf[1024];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

Verdict crit1()
{
    double worst = 0;
    for (double L : {5.0, 10.0, 20.0}) {
        const std::pair<TripleBox, double> cases[] = {
            {{0, L, 0, kPi, -L / 2, L / 2}, 2 * L * L / kPi},
            {{L / 4, L / 2, kPi / 6, kPi / 3, L / 4, L / 2}, (std::sqrt(3.0) - 1) * L * L / (32 * kPi)},
            {{3, 4, kPi / 4, 3 * kPi / 4, -L / 4, L / 4}, L / (std::sqrt(2.0) * kPi)},
            {{0, 1, 0, kPi, -L / 2, L / 2}, 2 * L / kPi},
        };
        for (const auto& [box, want] : cases) worst = std::max(worst, std::fabs(mu_box(box) / want - 1));
    }
    return {worst <= 1e-12, fmt("max relative error %.2e over 12 identities", worst)};
}

Verdict crit2()
{
    const auto boxes = default_boxes(5, 2);
    const MeasureResult m = measure_verify(0.5, 5, 2, boxes, 100000, g_seed, 0.0, false, g_threads);
    const MeasureResult c = measure_verify(0.5, 5, 2, boxes, 100000, g_seed, 0.0, true, g_threads);
    return {m.pass && !c.pass,
            fmt("%zu hits, max|z| %.2f, chi2 %.2f (dof %zu) p %.3g; control max|z| %.1f p %.2g -> %s", m.hits,
                m.max_abs_z, m.chi2, boxes.size(), m.p_value, c.max_abs_z, c.p_value,
                c.pass ? "passed (bad)" : "failed")};
}

Verdict crit3()
{
    const double triples[3][3] = {{0.5, 2, 1}, {0.2, 3, 2}, {1, 1, 0.5}};
    const std::size_t reps = 20000;
    bool ok = true;
    std::string d;
    for (const auto& t : triples) {
        const VacantResult v = vacant_decay(t[0], t[1], t[2], reps, g_seed, g_threads);
        const double sd = std::sqrt(v.predicted * (1 - v.predicted) / reps);
        const bool in = v.predicted >= 0.1 && v.predicted <= 0.9 && std::fabs(v.freq - v.predicted) <= 3 * sd;
        ok = ok && in;
        d += fmt("(%g,%g,%g): %.4f vs %.4f z %.2f; ", t[0], t[1], t[2], v.freq, v.predicted, (v.freq - v.predicted) / sd);
    }
    return {ok, d};
}

Verdict crit4()
{
    const double L = 5, lam = 10 * kPi / 50, want = 2 * lam * L * L / kPi;
    const Stick root = make_stick(HPoint{}, 0, L);
    const std::size_t reps = 10000;
    std::vector<double> counts(reps);
    // the fixed stick lies in B(o, L/2), so the pruned window there holds every stick that can hit it
    parallel_for(reps, g_threads, [&](std::size_t r) {
        const StickSample s = sample_window({lam, L, L / 2, g_seed}, r, true);
        std::size_t n = 0;
        for (const auto& st : s.sticks) n += sticks_meet(root, st) ? 1 : 0;
        counts[r] = static_cast<double>(n);
    });
    const MeanSe m = mean_se(counts);
    const double rel = std::fabs(m.mean / want - 1);
    return {rel <= 0.01, fmt("mean %.4f +- %.4f vs %.4f (rel %.2f%%)", m.mean, m.se, want, 100 * rel)};
}

Verdict crit5()
{
    const double L = 1;
    bool ok = true;
    std::string d;
    for (double m : {0.5, 0.9}) {
        const double lam = m * kPi / (2 * L * L);
        const SubcriticalStats s = subcritical_cluster_stats(lam, L, 10000, g_seed, 30.0, g_threads);
        const double untrunc = 1.0 - double(s.truncated) / double(s.reps);
        const bool in = s.mean_size <= s.gw_bound + 3 * s.stderr_size && untrunc >= 0.99;
        ok = ok && in;
        d += fmt("m=%.1f: mean %.3f +- %.3f vs bound %.1f, untruncated %.2f%%, max %zu; ", m, s.mean_size,
                 s.stderr_size, s.gw_bound, 100 * untrunc, s.max_size);
    }
    return {ok, d};
}

Verdict crit6()
{
    const double L = 40, lam = 32 * kPi / ((std::sqrt(3.0) - 1) * L * L);
    const GwResult g = gw_survival_experiment(L, lam, 10, 10000, g_seed, g_threads);
    const double q = 1 - std::exp(-1.0);
    const double child_sd = std::sqrt(q * (1 - q) / double(g.child_trials));
    const bool child_ok = std::fabs(g.child_freq - q) <= 3 * child_sd;
    const bool surv_ok = std::fabs(g.survival - g.oracle_fixed_point) <= 0.03;
    const bool geo_ok = g.geometry_failures == 0;
    return {child_ok && surv_ok && geo_ok,
            fmt("child %.4f vs %.4f (z %.2f, %zu trials); survival %.4f vs fixed point %.4f (depth-10 %.4f); "
                "geometry failures %zu",
                g.child_freq, q, (g.child_freq - q) / child_sd, g.child_trials, g.survival, g.oracle_fixed_point,
                g.oracle_depth, g.geometry_failures)};
}

Verdict crit7()
{
    const oracle::SuiteResult r = oracle::geometry_suite(g_seed, 1000);
    std::string d = fmt("%d checks, %d failures", r.checks, r.failures);
    for (const auto& n : r.notes) d += "; " + n;
    return {r.failures == 0, d};
}

Verdict crit8()
{
    const std::vector<double> Ls{6, 8, 10, 12};
    const double R = 6, r_in = 1;
    const std::size_t reps_c = 400, reps_u = 400;
    const double c_lo = kPi / 2, c_hi = 32 * kPi / (std::sqrt(3.0) - 1);
    const double u_lo = kPi / 2, u_hi = 5 * std::sqrt(2.0) * kPi;

    std::vector<double> lc, lu;
    std::string d;
    bool band_c = true, band_u = true;
    for (double L : Ls) {
        const ThresholdEstimate t = lambda_c_bisect(L, R, r_in, reps_c, 0.5, g_seed, g_threads);
        lc.push_back(t.lambda);
        band_c = band_c && t.scaled >= c_lo && t.scaled <= c_hi;
        d += fmt("L=%g lc*L^2=%.3f+-%.3f ", L, t.scaled, t.scaled_se);
        std::cout << "  [8] L=" << L << " lambda_c*L^2=" << t.scaled << " +- " << t.scaled_se << std::endl;
    }
    for (double L : Ls) {
        ExperimentSpec s;
        s.kind = ExperimentKind::two_arm_curve;
        const ThresholdEstimate u =
            lambda_u_proxy(L, lambda_grid(s, L), r_in, R, reps_u, g_seed, 0.05, g_threads);
        lu.push_back(u.found ? u.lambda : std::nan(""));
        band_u = band_u && u.found && u.scaled >= u_lo && u.scaled <= u_hi;
        d += fmt("L=%g lu*L=%.3f+-%.3f ", L, u.scaled, u.scaled_se);
        std::cout << "  [8] L=" << L << " lambda_u*L=" << (u.found ? u.scaled : std::nan("")) << " +- " << u.scaled_se
                  << std::endl;
    }
    auto spread = [&](const std::vector<double>& v, int pw) {
        double lo = 1e300, hi = 0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double x = v[i] * std::pow(Ls[i], pw);
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        return hi / lo;
    };
    const double sp_c = spread(lc, 2), sp_u = spread(lu, 1);
    bool slope_c_ok = false, slope_u_ok = false;
    LineFit fc{}, fu{};
    try {
        fc = scaling_fit(Ls, lc);
        slope_c_ok = std::fabs(fc.slope + 2) <= 0.5;
    } catch (const std::exception&) {
    }
    try {
        fu = scaling_fit(Ls, lu);
        slope_u_ok = std::fabs(fu.slope + 1) <= 0.5;
    } catch (const std::exception&) {
    }
    d += fmt("| lambda_c: band %s, spread %.2f, slope %.3f+-%.3f %s | lambda_u: band %s, spread %.2f, slope "
             "%.3f+-%.3f %s",
             band_c ? "ok" : "OUT", sp_c, fc.slope, fc.slope_se, slope_c_ok ? "ok" : "OUT", band_u ? "ok" : "OUT",
             sp_u, fu.slope, fu.slope_se, slope_u_ok ? "ok" : "OUT");
    return {band_c && band_u && sp_c <= 2 && sp_u <= 2 && slope_c_ok && slope_u_ok, d};
}

// Point, step and summary records, and the CSV data rows: everything an estimate
// depends on. The header and timing lines echo the thread count and wall time.
std::string persisted_estimates(const ExperimentSpec& spec, unsigned threads, const std::filesystem::path& dir)
{
    ExperimentSpec s = spec;
    s.threads = threads;
    const std::string base = (dir / ("t" + std::to_string(threads) + ".csv")).string();
    {
        ResultSink sink(output_paths(base), true);
        run_experiment(s, &sink);
    }
    std::string keep;
    std::ifstream js(output_paths(base).jsonl);
    for (std::string ln; std::getline(js, ln);)
        if (ln.find("\"record\":\"header\"") == std::string::npos && ln.find("\"record\":\"timing\"") == std::string::npos)
            keep += ln + '\n';
    std::ifstream cs(base);
    for (std::string ln; std::getline(cs, ln);)
        if (ln.empty() || ln[0] != '#') keep += ln + '\n';
    return keep;
}

Verdict crit9()
{
    const auto dir = std::filesystem::temp_directory_path() / "hypersticks_acceptance";
    std::filesystem::create_directories(dir);
    const unsigned many = std::max(2u, std::thread::hardware_concurrency());
    std::vector<ExperimentSpec> specs(4);
    specs[0].kind = ExperimentKind::crossing_curve;
    specs[0].L = {4, 6};
    specs[0].R = {4};
    specs[0].grid = 6;
    specs[0].reps = 40;
    specs[1].kind = ExperimentKind::lambda_c_bisect;
    specs[1].L = {4};
    specs[1].R = {4};
    specs[1].reps = 30;
    specs[1].lambda_min = 0.01;
    specs[1].lambda_max = 1.0;
    specs[2].kind = ExperimentKind::measure_verify;
    specs[2].L = {5};
    specs[2].lambda = {0.5};
    specs[2].n = 20000;
    specs[3].kind = ExperimentKind::gw_survival;
    specs[3].L = {40};
    specs[3].reps = 300;
    specs[3].depth = 6;
    bool ok = true;
    std::string d;
    for (auto& s : specs) {
        s.seed = g_seed;
        const std::string a = persisted_estimates(s, 1, dir), b = persisted_estimates(s, many, dir);
        const bool same = a == b && !a.empty();
        ok = ok && same;
        d += fmt("%s %s (%zu bytes); ", kind_name(s.kind), same ? "identical" : "DIFFERENT", a.size());
    }
    std::filesystem::remove_all(dir);
    return {ok, fmt("threads 1 vs %u: ", many) + d};
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"acceptance criteria"};
    std::vector<int> only;
    app.add_option("--only", only, "criteria to run")->delimiter(',');
    app.add_option("--threads", g_threads, "worker threads (0 = all cores)");
    app.add_option("--seed", g_seed, "base seed");
    CLI11_PARSE(app, argc, argv);
    if (g_threads == 0) g_threads = std::max(1u, std::thread::hardware_concurrency());

    const std::vector<std::pair<int, std::function<Verdict()>>> all = {
        {1, crit1}, {2, crit2}, {3, crit3}, {4, crit4}, {5, crit5},
        {6, crit6}, {7, crit7}, {8, crit8}, {9, crit9},
    };
    std::cout << version_tag() << ", seed " << g_seed << ", threads " << g_threads << std::endl;
    int failed = 0;
    for (const auto& [id, fn] : all) {
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += v.pass ? 0 : 1;
        std::cout << "criterion " << id << ": " << (v.pass ? "PASS" : "FAIL") << "  [" << fmt("%.1f s", secs) << "] "
                  << v.detail << std::endl;
    }
    return failed ? 1 : 0;
}
