#include "hypersticks/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "hypersticks/experiments.hpp"
#include "hypersticks/percolation.hpp"
#include "hypersticks/persistence.hpp"
#include "hypersticks/stickproc.hpp"

namespace hs {

namespace {

std::string flag_of(const std::string& key)
{
    std::string f = key;
    std::replace(f.begin(), f.end(), '_', '-');
    return "--" + f;
}

// One subcommand: string-valued options keyed by spec key, applied after the spec file.
struct Cmd {
    CLI::App* app = nullptr;
    std::vector<std::pair<std::string, CLI::Option*>> opts;
    std::map<std::string, std::string> values;
    std::string spec_file;
    std::string out;
    std::vector<std::string> inputs;
    bool force = false;

    void add(const std::string& key, const std::string& help)
    {
        auto* o = app->add_option(flag_of(key), values[key], help);
        static const std::map<std::string, std::string> types = {
            {"L", "LIST"}, {"lambda", "LIST"}, {"R", "LIST"}, {"m", "LIST"}, {"seed", "UINT"},
            {"threads", "UINT"}, {"grid", "UINT"}, {"reps", "UINT"}, {"depth", "UINT"}, {"n", "UINT"},
            {"control", "BOOL"}};
        const auto t = types.find(key);
        o->type_name(t == types.end() ? "NUM" : t->second);
        opts.emplace_back(key, o);
    }
};

void add_common(Cmd& c, bool spec_file = true)
{
    c.add("L", "stick length(s), comma separated");
    c.add("lambda", "intensity grid, comma separated ascending");
    c.add("R", "outer radius / window radius, comma separated");
    c.add("seed", "64-bit seed (fresh if omitted)");
    c.add("threads", "worker threads, 0 = all cores (default 1)");
    c.app->add_option("--out", c.out, "output file; x.csv also writes x.jsonl")->type_name("PATH");
    c.app->add_flag("--force", c.force, "overwrite existing output");
    if (spec_file) c.app->add_option("--spec", c.spec_file, "key=value spec file; flags override it")->type_name("PATH");
}

void add_curve(Cmd& c)
{
    c.add("lambda_min", "lower end of a geometric lambda grid");
    c.add("lambda_max", "upper end of a geometric lambda grid");
    c.add("grid", "number of grid points (>= 2)");
    c.add("r_in", "inner radius (default 1)");
    c.add("reps", "replicates per point (default 100)");
}

std::vector<std::pair<std::string, std::string>> read_spec_file(const std::string& path)
{
    std::ifstream is(path);
    if (!is) throw SpecError("spec", "cannot read spec file " + path);
    std::vector<std::pair<std::string, std::string>> kv;
    std::string ln;
    int n = 0;
    while (std::getline(is, ln)) {
        ++n;
        if (auto h = ln.find('#'); h != std::string::npos) ln.erase(h);
        const auto b = ln.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        const auto e = ln.find_last_not_of(" \t\r");
        ln = ln.substr(b, e - b + 1);
        const auto eq = ln.find('=');
        if (eq == std::string::npos) throw SpecError("spec", path + ":" + std::to_string(n) + ": expected key=value");
        auto trim = [](std::string s) {
            const auto b2 = s.find_first_not_of(" \t");
            const auto e2 = s.find_last_not_of(" \t");
            return b2 == std::string::npos ? std::string() : s.substr(b2, e2 - b2 + 1);
        };
        kv.emplace_back(trim(ln.substr(0, eq)), trim(ln.substr(eq + 1)));
    }
    return kv;
}

// Spec from the file (if any) then flag overrides; returns true if the seed was drawn fresh.
bool resolve_spec(const Cmd& c, ExperimentSpec& s)
{
    const ExperimentKind kind = s.kind;
    bool seeded = false;
    if (!c.spec_file.empty()) {
        for (const auto& [k, v] : read_spec_file(c.spec_file)) {
            std::string key = k;
            std::replace(key.begin(), key.end(), '-', '_');
            if (key == "kind") {
                const auto pk = parse_kind(v);
                if (!pk || *pk != kind)
                    throw SpecError("spec", "spec file kind '" + v + "' does not match subcommand (" +
                                                kind_name(kind) + ")");
                continue;
            }
            set_spec_item(s, key, v);
            seeded = seeded || key == "seed";
        }
    }
    for (const auto& [k, o] : c.opts) {
        if (o->count() == 0) continue;
        set_spec_item(s, k, c.values.at(k));
        seeded = seeded || k == "seed";
    }
    if (!c.out.empty()) s.out = c.out;
    s.kind = kind;
    if (!seeded) {
        s.seed = fresh_seed();
        return true;
    }
    return false;
}

void echo_spec(std::ostream& out, const ExperimentSpec& s, bool fresh)
{
    out << "# " << version_tag() << '\n';
    for (const auto& [k, v] : spec_items(s)) out << "# " << k << '=' << v << '\n';
    if (fresh) out << "# seed drawn fresh: " << s.seed << '\n';
}

void print_rows(std::ostream& out, const ResultRecord& r)
{
    out << "L,lambda,R,estimate,stderr,reps,seed,status\n";
    for (const auto& p : r.points)
        out << format_double(p.L) << ',' << format_double(p.lambda) << ',' << format_double(p.R) << ','
            << format_double(p.estimate) << ',' << format_double(p.std_err) << ',' << p.reps << ',' << p.seed << ','
            << p.status << '\n';
    for (const auto& [k, v] : r.summary) out << k << ',' << format_double(v) << '\n';
}

double extra_of(const PointRecord& p, const std::string& key)
{
    for (const auto& [k, v] : p.extra)
        if (k == key) return v;
    return std::nan("");
}

void print_measure(std::ostream& out, const ResultRecord& r)
{
    out << std::fixed << std::setprecision(4);
    out << "box  rho'          phi           count      expected      z\n";
    int i = 0;
    for (const auto& p : r.points) {
        out << std::setw(3) << i++ << "  [" << extra_of(p, "rho1") << "," << extra_of(p, "rho2") << "]  ["
            << extra_of(p, "phi1") << "," << extra_of(p, "phi2") << "]  " << std::setw(9)
            << static_cast<long long>(extra_of(p, "count")) << "  " << std::setw(12) << extra_of(p, "expected")
            << "  " << std::setw(8) << extra_of(p, "z") << '\n';
    }
    out.unsetf(std::ios::floatfield);
    out << std::setprecision(6);
    for (const auto& [k, v] : r.summary)
        if (k == "pass") out << (v > 0.5 ? "PASS" : "FAIL") << '\n';
}

int run_experiment_cmd(const Cmd& c, ExperimentKind kind, std::ostream& out)
{
    ExperimentSpec s;
    s.kind = kind;
    const bool fresh = resolve_spec(c, s);
    apply_defaults(s);
    validate(s);
    std::unique_ptr<ResultSink> sink;
    if (!s.out.empty()) sink = std::make_unique<ResultSink>(output_paths(s.out), c.force);
    echo_spec(out, s, fresh);
    out.flush();
    const ResultRecord r = run_experiment(s, sink.get());
    print_rows(out, r);
    if (kind == ExperimentKind::measure_verify) print_measure(out, r);
    if (sink) out << "# wrote " << sink->paths().jsonl << " and " << sink->paths().csv << '\n';
    return 0;
}

int run_sample(const Cmd& c, bool clusters, std::ostream& out, const std::string& input, std::uint64_t replicate,
               bool prune)
{
    StickSample smp;
    if (clusters && !input.empty()) {
        std::ifstream is(input);
        if (!is) throw SpecError("input", "cannot read " + input);
        smp = read_sample(is);
    } else {
        ExperimentSpec s;
        const bool fresh = resolve_spec(c, s);
        if (s.L.size() != 1) throw SpecError("L", "exactly one L is required");
        if (s.lambda.size() != 1) throw SpecError("lambda", "exactly one lambda is required");
        if (s.R.size() != 1) throw SpecError("R", "exactly one window radius is required");
        ProcessConfig pc{s.lambda[0], s.L[0], s.R[0], s.seed};
        try {
            validate(pc);
        } catch (const std::invalid_argument& e) {
            const std::string m = e.what();
            const std::string key = m.find("lambda") != std::string::npos ? "lambda"
                                    : m.find("window") != std::string::npos ? "R"
                                                                            : "L";
            throw SpecError(key, m);
        }
        if (fresh) out << "# seed drawn fresh: " << s.seed << '\n';
        smp = sample_window(pc, replicate, prune);
    }
    std::ofstream file;
    std::ostream* os = &out;
    if (!c.out.empty()) {
        if (!c.force && std::ifstream(c.out)) throw OutputExists("output file " + c.out + " exists (use --force)");
        file.open(c.out, std::ios::binary | std::ios::trunc);
        if (!file) throw IoError("cannot open " + c.out);
        os = &file;
    }
    if (!clusters) {
        write_sample(*os, smp);
        *os << "# replicate=" << replicate << " prune=" << (prune ? 1 : 0) << '\n';
    } else {
        const ClusterLabeling lab = build_clusters(smp.sticks);
        *os << std::setprecision(17) << "# lambda=" << smp.config.lambda << " L=" << smp.config.L
            << " window_radius=" << smp.config.window_radius << " seed=" << smp.config.seed
            << " sticks=" << smp.sticks.size() << " clusters=" << lab.cluster_count << '\n';
        write_labeling(*os, lab);
    }
    if (!c.out.empty()) out << "# wrote " << c.out << '\n';
    return 0;
}

// Threshold estimates per L from lambda-c points or two-arm summaries.
int run_fit(const Cmd& c, std::ostream& out)
{
    if (c.inputs.empty()) throw SpecError("input", "at least one --input results file is required");
    std::vector<double> Ls, lams;
    ResultRecord fit;
    for (const auto& in : c.inputs) {
        const std::string path = in.size() > 4 && in.substr(in.size() - 4) == ".csv" ? output_paths(in).jsonl : in;
        const ResultRecord r = read_jsonl_file(path);
        if (fit.version.empty()) {
            fit.spec = r.spec;
            fit.version = r.version;
        }
        if (r.spec.kind == ExperimentKind::lambda_c_bisect) {
            for (const auto& p : r.points) {
                if (p.status != "ok") continue;
                Ls.push_back(p.L);
                lams.push_back(p.lambda);
                fit.points.push_back(p);
            }
        } else if (r.spec.kind == ExperimentKind::two_arm_curve) {
            for (const auto& [k, v] : r.summary) {
                if (k.rfind("lambda_u_L", 0) != 0 || !std::isfinite(v)) continue;
                const auto rpos = k.find("_R");
                PointRecord p;
                p.kind = "lambda_u_proxy";
                p.L = std::stod(k.substr(10, rpos - 10));
                p.R = rpos == std::string::npos ? 0.0 : std::stod(k.substr(rpos + 2));
                p.lambda = v;
                p.estimate = v * p.L;
                for (const auto& [k2, v2] : r.summary)
                    if (k2 == "lambda_u_se" + k.substr(8)) p.std_err = v2 * p.L;
                p.reps = r.spec.reps;
                p.seed = r.spec.seed;
                Ls.push_back(p.L);
                lams.push_back(v);
                fit.points.push_back(p);
            }
        } else {
            throw SpecError("input", path + " holds " + kind_name(r.spec.kind) + " results, not thresholds");
        }
    }
    const LineFit f = scaling_fit(Ls, lams);
    fit.summary = {{"slope", f.slope}, {"slope_se", f.slope_se}};
    print_rows(out, fit);
    if (!c.out.empty()) {
        emit_plot_data(fit, c.out, c.force);
        out << "# wrote " << c.out << '\n';
    }
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Poisson stick percolation in the hyperbolic plane: samplers, clusters and Monte Carlo "
                 "threshold experiments.\nEnvironment: HYPERSTICKS_MAX_STICKS overrides the expected "
                 "sticks-per-window cap (default 5e7).",
                 "hypersticks"};
    app.set_version_flag("--version", version_tag());
    app.require_subcommand(1);
    // top-level --help lists every subcommand's flags
    app.set_help_flag();
    app.set_help_all_flag("-h,--help", "print the full flag reference");

    std::map<std::string, Cmd> cmds;
    auto make = [&](const std::string& name, const std::string& desc) -> Cmd& {
        Cmd& c = cmds[name];
        c.app = app.add_subcommand(name, desc);
        return c;
    };

    std::string input;
    std::uint64_t replicate = 0;
    bool prune = false;

    {
        Cmd& c = make("sample", "draw one window sample and write its sticks");
        add_common(c);
        c.app->add_option("--replicate", replicate, "replicate index (default 0)");
        c.app->add_flag("--prune", prune, "keep only sticks meeting B(o, R)");
    }
    {
        Cmd& c = make("clusters", "label the clusters of a sample (generated or --input)");
        add_common(c);
        c.app->add_option("--input", input, "sample file written by `sample`");
        c.app->add_option("--replicate", replicate, "replicate index (default 0)");
        c.app->add_flag("--prune", prune, "keep only sticks meeting B(o, R)");
    }
    {
        Cmd& c = make("verify-measure", "check window hit triples against the intensity measure in boxes");
        add_common(c);
        c.add("n", "target number of hits (default 100000)");
        c.add("ray_angle", "angle of the reference ray (default 0)");
        c.add("control", "true: restricted sampler with a uniform hitting angle (must fail)");
    }
    {
        Cmd& c = make("crossing", "crossing frequency of the annulus B(o,R) \\ B(o,r_in) over a lambda grid");
        add_common(c);
        add_curve(c);
    }
    {
        Cmd& c = make("lambda-c", "bisection estimate of the crossing threshold");
        add_common(c);
        add_curve(c);
        c.add("target_p", "target crossing probability (default 0.5)");
    }
    {
        Cmd& c = make("two-arm", "frequency of >= 2 crossing clusters and the uniqueness proxy");
        add_common(c);
        add_curve(c);
        c.add("threshold", "drop level for the uniqueness proxy (default 0.05)");
    }
    {
        Cmd& c = make("gw-survival", "Galton-Watson half-plane embedding survival");
        add_common(c);
        c.add("depth", "generations (default 10)");
        c.add("reps", "trees (default 100)");
    }
    {
        Cmd& c = make("vacant-decay", "probability that [0,R] on a ray is hit by no stick");
        add_common(c);
        c.add("reps", "replicates (default 100)");
    }
    {
        Cmd& c = make("subcritical", "rooted cluster size against the Galton-Watson progeny bound");
        add_common(c);
        c.add("m", "offspring means 2 lambda L^2/pi, comma separated, each < 1");
        c.add("reps", "replicates (default 100)");
    }
    {
        Cmd& c = make("fit-scaling", "log-log slope of threshold estimates against L");
        c.app->add_option("--input", c.inputs, "results files (.jsonl, or .csv with its .jsonl sibling)");
        c.app->add_option("--out", c.out, "CSV output");
        c.app->add_flag("--force", c.force, "overwrite existing output");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "hypersticks: error: " << e.what() << '\n';
        return 2;
    }

    std::string name;
    for (auto& [n, c] : cmds)
        if (c.app->parsed()) name = n;
    const Cmd& c = cmds.at(name);

    try {
        if (name == "sample") return run_sample(c, false, out, input, replicate, prune);
        if (name == "clusters") return run_sample(c, true, out, input, replicate, prune);
        if (name == "fit-scaling") return run_fit(c, out);
        static const std::map<std::string, ExperimentKind> kinds = {
            {"verify-measure", ExperimentKind::measure_verify}, {"crossing", ExperimentKind::crossing_curve},
            {"lambda-c", ExperimentKind::lambda_c_bisect},      {"two-arm", ExperimentKind::two_arm_curve},
            {"gw-survival", ExperimentKind::gw_survival},       {"vacant-decay", ExperimentKind::vacant_decay},
            {"subcritical", ExperimentKind::subcritical_domination},
        };
        return run_experiment_cmd(c, kinds.at(name), out);
    } catch (const SpecError& e) {
        err << "hypersticks: error: " << flag_of(e.key) << ": " << e.what() << '\n';
        return 2;
    } catch (const OutputExists& e) {
        err << "hypersticks: error: --out: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "hypersticks: runtime error: " << e.what() << '\n';
        return 1;
    }
}

int run_cli(int argc, const char* const* argv) { return run_cli(argc, argv, std::cout, std::cerr); }

}  // namespace hs
