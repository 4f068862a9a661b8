#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "hypersticks/experiments.hpp"
#include "hypersticks/persistence.hpp"

using namespace hs;
using doctest::Approx;

namespace {

std::string spec_error_key(const ExperimentSpec& s)
{
    ExperimentSpec t = s;
    try {
        apply_defaults(t);
        validate(t);
    } catch (const SpecError& e) {
        return e.key;
    }
    return "";
}

ExperimentSpec small_crossing()
{
    ExperimentSpec s;
    s.kind = ExperimentKind::crossing_curve;
    s.L = {3};
    s.R = {3};
    s.lambda = {0.0, 0.2, 0.6};
    s.reps = 24;
    s.seed = 5;
    return s;
}

std::string estimates_only(const ResultRecord& r)
{
    std::ostringstream os;
    for (const auto& p : r.points) os << point_json(p) << '\n';
    for (const auto& p : r.steps) os << point_json(p, "step") << '\n';
    os << summary_json(r.summary) << '\n';
    return os.str();
}

}  // namespace

TEST_CASE("kind names round trip")
{
    for (auto k : {ExperimentKind::crossing_curve, ExperimentKind::lambda_c_bisect, ExperimentKind::two_arm_curve,
                   ExperimentKind::measure_verify, ExperimentKind::gw_survival, ExperimentKind::vacant_decay,
                   ExperimentKind::subcritical_domination})
        CHECK(parse_kind(kind_name(k)) == k);
    CHECK_FALSE(parse_kind("bogus").has_value());
}

TEST_CASE("spec validation names the offending key")
{
    ExperimentSpec s = small_crossing();
    CHECK(spec_error_key(s) == "");

    ExperimentSpec e = small_crossing();
    e.lambda.clear();
    e.grid = 0;
    CHECK(spec_error_key(e) == "grid");

    e = small_crossing();
    e.L = {-3};
    CHECK(spec_error_key(e) == "L");
    e = small_crossing();
    e.reps = 0;
    CHECK(spec_error_key(e) == "reps");
    e = small_crossing();
    e.lambda = {0.3, 0.1};
    CHECK(spec_error_key(e) == "lambda");
    e = small_crossing();
    e.r_in = 5;
    CHECK(spec_error_key(e) == "r_in");
    e = small_crossing();
    e.kind = ExperimentKind::lambda_c_bisect;
    e.target_p = 1.0;
    CHECK(spec_error_key(e) == "target_p");
    e = small_crossing();
    e.kind = ExperimentKind::gw_survival;
    e.L = {10};
    CHECK(spec_error_key(e) == "L");
    e = small_crossing();
    e.kind = ExperimentKind::subcritical_domination;
    e.lambda.clear();
    e.m = {1.2};
    CHECK(spec_error_key(e) == "m");
}

TEST_CASE("spec items parse back")
{
    ExperimentSpec s = small_crossing();
    s.lambda_min = 0.01;
    s.threshold = 0.1;
    apply_defaults(s);
    ExperimentSpec t;
    for (const auto& [k, v] : spec_items(s)) set_spec_item(t, k, v);
    CHECK(spec_items(t) == spec_items(s));

    set_spec_item(t, "r-in", "0.5");
    CHECK(t.r_in == 0.5);
    set_spec_item(t, "L", "6,8,10");
    CHECK(t.L == std::vector<double>{6, 8, 10});
    CHECK_THROWS_AS(set_spec_item(t, "nope", "1"), SpecError);
    try {
        set_spec_item(t, "reps", "ten");
        FAIL("no throw");
    } catch (const SpecError& e) {
        CHECK(e.key == "reps");
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(std::stod(format_double(kPi)) == kPi);
}

TEST_CASE("grids")
{
    const auto g = geometric_grid(0.01, 1.0, 5);
    REQUIRE(g.size() == 5);
    CHECK(g.front() == Approx(0.01));
    CHECK(g.back() == Approx(1.0));
    CHECK(g[2] == Approx(0.1));
    ExperimentSpec s;
    s.kind = ExperimentKind::crossing_curve;
    const auto d = lambda_grid(s, 10);
    CHECK(d.front() == Approx(kPi / 400));
    CHECK(d.back() == Approx(64 * kPi / ((std::sqrt(3.0) - 1) * 100)));
    s.kind = ExperimentKind::two_arm_curve;
    const auto u = lambda_grid(s, 10);
    CHECK(u.front() == Approx(kPi / 40));
    CHECK(u.back() == Approx(10 * std::sqrt(2.0) * kPi / 10));
}

TEST_CASE("crossing curve: zero intensity and determinism across threads")
{
    const auto a = crossing_curve(3, {0.0, 0.3, 0.8}, 1, 3, 40, 11, 1);
    const auto b = crossing_curve(3, {0.0, 0.3, 0.8}, 1, 3, 40, 11, 4);
    REQUIRE(a.size() == 3);
    CHECK(a[0].estimate == 0.0);
    CHECK(a[0].std_err == 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(point_json(a[i]) == point_json(b[i]));
        CHECK(a[i].reps == 40);
    }
    // binomial standard error
    const double f = a[2].estimate;
    CHECK(a[2].std_err == Approx(std::sqrt(f * (1 - f) / 40)));
    // nested samples make the curve monotone replicate by replicate
    CHECK(a[1].estimate <= a[2].estimate);
}

TEST_CASE("scaling fit")
{
    const std::vector<double> L{6, 8, 10, 12};
    std::vector<double> c2, c1;
    for (double l : L) {
        c2.push_back(7.0 / (l * l));
        c1.push_back(3.0 / l);
    }
    CHECK(scaling_fit(L, c2).slope == Approx(-2.0).epsilon(1e-12));
    CHECK(scaling_fit(L, c1).slope == Approx(-1.0).epsilon(1e-12));
    CHECK(scaling_fit(L, c1).slope_se == Approx(0.0).scale(1));
    CHECK_THROWS(scaling_fit({6, 8}, {1, 2}));
    CHECK_THROWS(scaling_fit({6, 6, 6}, {1, 2, 3}));
    CHECK_THROWS(scaling_fit({6, 8, 10}, {1, -2, 3}));
}

TEST_CASE("lambda_c bisection")
{
    // both ends below target
    CHECK_THROWS_AS(lambda_c_bisect(3, 3, 1, 20, 0.5, 1, 1, 1e-4, 2e-4), NonBracketing);
    const ThresholdEstimate t = lambda_c_bisect(3, 3, 1, 60, 0.5, 3, 2, 0.02, 1.0);
    CHECK(t.found);
    CHECK(t.lo < t.hi);
    CHECK(t.hi / t.lo - 1 <= 0.05 + 1e-12);
    CHECK(t.f_lo < 0.5);
    CHECK(t.f_hi >= 0.5);
    CHECK(t.lambda >= t.lo);
    CHECK(t.lambda <= t.hi);
    CHECK(t.scaled == Approx(t.lambda * 9));
    CHECK(t.std_err > 0);
    CHECK(t.steps.size() == t.iterations + 2);
    // higher target, higher threshold
    const ThresholdEstimate hi = lambda_c_bisect(3, 3, 1, 60, 0.9, 3, 2, 0.02, 1.0);
    CHECK(hi.lambda > t.lambda);
}

TEST_CASE("lambda_u proxy")
{
    const auto grid = geometric_grid(kPi / 16, 4.0, 8);
    const ThresholdEstimate u = lambda_u_proxy(4, grid, 1, 3, 40, 2, 0.05, 2);
    if (u.found) {
        CHECK(u.lambda >= u.lo);
        CHECK(u.lambda <= u.hi);
        CHECK(u.f_lo >= 0.05);
        CHECK(u.f_hi < 0.05);
        CHECK(u.scaled == Approx(4 * u.lambda));
    }
    const auto curve = two_arm_curve(4, grid, 1, 3, 40, 2, 1);
    REQUIRE(curve.size() == grid.size());
    // the proxy's scan points are a prefix of the curve
    for (std::size_t i = 0; i < u.steps.size(); ++i) CHECK(u.steps[i].estimate == curve[i].estimate);
}

TEST_CASE("measure verification passes and the control fails")
{
    const auto boxes = default_boxes(5, 2);
    CHECK(boxes.size() == 8);
    double total = 0;
    for (const auto& b : boxes) total += mu_box(b);
    CHECK(total == Approx(mu_box({0, 2, 0, kPi, -2.5, 2.5})).epsilon(1e-12));

    const MeasureResult ok = measure_verify(0.5, 5, 2, boxes, 20000, 7, 0.0, false, 2);
    CHECK(ok.hits >= 20000 * 0.9);
    CHECK(ok.pass);
    const MeasureResult rot = measure_verify(0.5, 5, 2, boxes, 20000, 7, kPi / 3, false, 2);
    CHECK(rot.pass);
    const MeasureResult ctl = measure_verify(0.5, 5, 2, boxes, 20000, 7, 0.0, true, 2);
    CHECK_FALSE(ctl.pass);
}

TEST_CASE("vacant decay and GW experiment smoke")
{
    const VacantResult v = vacant_decay(0.3, 3, 1, 400, 4, 2);
    CHECK(v.predicted == Approx(std::exp(-2 / kPi * 0.3 * 3 * 1)));
    CHECK(std::fabs(v.z) < 4);

    const GwResult g = gw_survival_experiment(40, 32 * kPi / ((std::sqrt(3.0) - 1) * 1600), 1, 400, 8, 2);
    const double q = 1 - std::exp(-1.0);
    CHECK(g.geometry_failures == 0);
    CHECK(g.oracle_depth == Approx(1 - (1 - q) * (1 - q)));
    CHECK(std::fabs(g.survival - g.oracle_depth) < 4 * std::sqrt(g.oracle_depth * (1 - g.oracle_depth) / 400));
}

TEST_CASE("run_experiment: determinism and persistence")
{
    ExperimentSpec s = small_crossing();
    s.threads = 1;
    const ResultRecord a = run_experiment(s);
    s.threads = 3;
    const ResultRecord b = run_experiment(s);
    CHECK(estimates_only(a) == estimates_only(b));
    CHECK(a.points.size() == 3);

    std::stringstream ss;
    write_jsonl(ss, a);
    const ResultRecord back = read_jsonl(ss);
    CHECK(estimates_only(back) == estimates_only(a));
    CHECK(spec_items(back.spec) == spec_items(a.spec));

    std::ostringstream csv;
    write_csv(csv, a);
    const std::string c = csv.str();
    CHECK(c.find("L,lambda,R,estimate,stderr,reps,seed\n") != std::string::npos);
    CHECK(c.find("\n3,0,3,0,0,24,5\n") != std::string::npos);
}

TEST_CASE("measure_verify record round-trips losslessly")
{
    ExperimentSpec s;
    s.kind = ExperimentKind::measure_verify;
    s.L = {5};
    s.lambda = {0.5};
    s.R = {2};
    s.n = 3000;
    s.seed = 9;
    const ResultRecord r = run_experiment(s);
    REQUIRE(r.points.size() == 8);
    std::stringstream ss;
    write_jsonl(ss, r);
    const std::string first = ss.str();
    const ResultRecord back = read_jsonl(ss);
    std::ostringstream again;
    write_jsonl(again, back);
    CHECK(again.str() == first);
}

TEST_CASE("sink refuses to overwrite")
{
    const auto dir = std::filesystem::temp_directory_path() / "hs_sink_test";
    std::filesystem::create_directories(dir);
    const std::string out = (dir / "run.csv").string();
    std::filesystem::remove(dir / "run.csv");
    std::filesystem::remove(dir / "run.jsonl");
    const OutputPaths p = output_paths(out);
    CHECK(p.jsonl == (dir / "run.jsonl").string());
    {
        ResultSink sink(p, false);
        run_experiment(small_crossing(), &sink);
    }
    CHECK(std::filesystem::exists(p.csv));
    const ResultRecord r = read_jsonl_file(p.jsonl);
    CHECK(r.points.size() == 3);
    CHECK_THROWS_AS(ResultSink(p, false), OutputExists);
    CHECK_NOTHROW(ResultSink(p, true));
    std::filesystem::remove_all(dir);
}
