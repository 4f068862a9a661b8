// Monte Carlo drivers: crossing and two-arm curves, threshold estimates, sampler
// verification, GW survival, vacant-line decay and subcritical domination.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hypersticks/stats.hpp"
#include "hypersticks/stickproc.hpp"

namespace hs {

enum class ExperimentKind {
    crossing_curve,
    lambda_c_bisect,
    two_arm_curve,
    measure_verify,
    gw_survival,
    vacant_decay,
    subcritical_domination,
};

const char* kind_name(ExperimentKind k);
std::optional<ExperimentKind> parse_kind(const std::string& s);

// Validation failure tied to one spec key (reported as the flag --key).
struct SpecError : std::invalid_argument {
    SpecError(std::string key_, const std::string& msg) : std::invalid_argument(msg), key(std::move(key_)) {}
    std::string key;
};

struct NonBracketing : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::crossing_curve;
    std::vector<double> L;
    std::vector<double> lambda;          // explicit grid
    double lambda_min = 0.0;             // geometric grid / bisection bracket
    double lambda_max = 0.0;
    int grid = -1;                       // -1 unset; 0 and 1 are rejected
    std::vector<double> m;               // offspring means (subcritical)
    std::vector<double> R;
    double r_in = 1.0;
    int depth = 10;
    std::size_t reps = 100;
    std::uint64_t seed = 0;
    std::size_t n = 100000;              // measure_verify target hit count
    double target_p = 0.5;
    double threshold = 0.05;
    double ray_angle = 0.0;
    bool control = false;
    unsigned threads = 1;
    std::string out;
};

// Fill kind-dependent defaults (R, lambda) without touching user values.
void apply_defaults(ExperimentSpec& s);
void validate(const ExperimentSpec& s);
// Explicit grid if given, else `grid` geometric points on [lambda_min, lambda_max];
// with neither, a kind-specific default range scaled by L.
std::vector<double> lambda_grid(const ExperimentSpec& s, double L);
std::vector<double> geometric_grid(double lo, double hi, std::size_t n);
// Ordered key/value echo of the spec. Values parse back through set_spec_item.
std::vector<std::pair<std::string, std::string>> spec_items(const ExperimentSpec& s);
// Assign one key from text (spec-file keys; '-' and '_' are interchangeable).
// Throws SpecError naming the key on unknown keys or malformed values.
void set_spec_item(ExperimentSpec& s, const std::string& key, const std::string& value);
std::string format_double(double x);

using Extras = std::vector<std::pair<std::string, double>>;

struct PointRecord {
    std::string kind;
    double L = 0.0, lambda = 0.0, R = 0.0;
    double estimate = 0.0, std_err = 0.0;
    std::size_t reps = 0;
    std::uint64_t seed = 0;
    std::string status = "ok";
    std::string message;
    Extras extra;
};

struct ResultRecord {
    ExperimentSpec spec;
    std::vector<PointRecord> points;
    // Intermediate evaluations (bisection steps, scan points); JSONL only.
    std::vector<PointRecord> steps;
    Extras summary;
    double wall_seconds = 0.0;
    std::string version;
};

// --- window crossing ---

struct WindowOutcome {
    std::size_t arms = 0;     // two_arm_count
    std::size_t kept = 0;     // sticks meeting B(o, R)
};
WindowOutcome window_outcome(double lambda, double L, double r_in, double R, std::uint64_t seed, std::uint64_t rep);

// Per-replicate outcomes at one intensity, in replicate order.
std::vector<WindowOutcome> window_outcomes(double lambda, double L, double r_in, double R, std::size_t reps,
                                           std::uint64_t seed, unsigned threads);

std::vector<PointRecord> crossing_curve(double L, const std::vector<double>& grid, double r_in, double R,
                                        std::size_t reps, std::uint64_t seed, unsigned threads = 1);
std::vector<PointRecord> two_arm_curve(double L, const std::vector<double>& grid, double r_in, double R,
                                       std::size_t reps, std::uint64_t seed, unsigned threads = 1);

struct ThresholdEstimate {
    double L = 0.0, R = 0.0;
    double lambda = 0.0, std_err = 0.0;
    double scaled = 0.0, scaled_se = 0.0;    // lambda L^2 (lambda_c) or lambda L (lambda_u)
    std::size_t iterations = 0;
    double lo = 0.0, hi = 0.0, f_lo = 0.0, f_hi = 0.0;
    std::vector<PointRecord> steps;          // every evaluated intensity
    bool found = true;
};

// Default bracket [pi/(4L^2), 64pi/((sqrt3-1)L^2)] when lo/hi are 0.
ThresholdEstimate lambda_c_bisect(double L, double R, double r_in, std::size_t reps, double target_p,
                                  std::uint64_t seed, unsigned threads = 1, double lo = 0.0, double hi = 0.0);

// Ascending scan of the two-arm frequency. The estimate is where the frequency
// first drops below `threshold` after having been at or above it, interpolated in
// log lambda between the two grid points around the drop. Stops scanning there.
ThresholdEstimate lambda_u_proxy(double L, const std::vector<double>& grid, double r_in, double R, std::size_t reps,
                                 std::uint64_t seed, double threshold = 0.05, unsigned threads = 1);

LineFit scaling_fit(const std::vector<double>& L, const std::vector<double>& estimate);

// --- sampler verification ---

struct BoxResult {
    TripleBox box;
    double mu = 0.0;
    std::size_t count = 0;
    double expected = 0.0;
    double z = 0.0;
};

struct MeasureResult {
    std::vector<BoxResult> boxes;
    std::size_t hits = 0;
    std::size_t replicates = 0;
    double chi2 = 0.0;
    double p_value = 0.0;
    double max_abs_z = 0.0;
    bool pass = false;
    bool control = false;
};

// Eight boxes: rho' halves of [0, rho_max] times four phi bins, full r range.
std::vector<TripleBox> default_boxes(double L, double rho_max);

// Hit triples of window-sampled sticks on the ray [0, rho_max] at ray_angle, box
// counts against lambda * mu_box. With control set the triples come from the
// restricted sampler with a uniform hitting angle instead.
MeasureResult measure_verify(double lambda, double L, double rho_max, const std::vector<TripleBox>& boxes,
                             std::size_t n_target, std::uint64_t seed, double ray_angle = 0.0, bool control = false,
                             unsigned threads = 1);

// --- GW embedding ---

struct GwResult {
    double L = 0.0, lambda = 0.0, q = 0.0;
    int depth = 0;
    std::size_t trees = 0, survived = 0, geometry_failures = 0;
    double survival = 0.0, survival_se = 0.0;
    double oracle_fixed_point = 0.0, oracle_depth = 0.0;
    std::size_t child_trials = 0, child_successes = 0;
    double child_freq = 0.0, child_se = 0.0;
    std::vector<double> generation_mean, generation_se;
    std::string first_failure;
};

GwResult gw_survival_experiment(double L, double lambda, int depth, std::size_t trees, std::uint64_t seed,
                                unsigned threads = 1);

// --- vacant line ---

struct VacantResult {
    double lambda = 0.0, L = 0.0, R = 0.0;
    std::size_t reps = 0, vacant = 0;
    double freq = 0.0, se = 0.0, predicted = 0.0, z = 0.0;
};

// Window-sampled frequency of "no stick hits [0, R] on the ray at angle 0".
VacantResult vacant_decay(double lambda, double L, double R, std::size_t reps, std::uint64_t seed,
                          unsigned threads = 1);

// --- dispatch ---

class ResultSink;

// Runs the spec, streaming records to sink when given.
ResultRecord run_experiment(const ExperimentSpec& spec, ResultSink* sink = nullptr);

std::string version_tag();

}  // namespace hs
