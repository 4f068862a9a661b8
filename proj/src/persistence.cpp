#include "hypersticks/persistence.hpp"

#include <cmath>
#include <filesystem>
#include <istream>
#include <ostream>

#include "json.hpp"

namespace hs {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

ojson num(double x)
{
    if (!std::isfinite(x)) return nullptr;
    return x;
}

double get_num(const ojson& j)
{
    if (j.is_null()) return std::nan("");
    return j.get<double>();
}

bool ends_with(const std::string& s, const std::string& suf)
{
    return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

ojson point_obj(const PointRecord& p, const char* record)
{
    ojson j;
    j["record"] = record;
    j["kind"] = p.kind;
    j["L"] = num(p.L);
    j["lambda"] = num(p.lambda);
    j["R"] = num(p.R);
    j["estimate"] = num(p.estimate);
    j["stderr"] = num(p.std_err);
    j["reps"] = p.reps;
    j["seed"] = p.seed;
    j["status"] = p.status;
    if (!p.message.empty()) j["message"] = p.message;
    ojson ex = ojson::object();
    for (const auto& [k, v] : p.extra) ex[k] = num(v);
    j["extra"] = ex;
    return j;
}

PointRecord point_from(const ojson& j)
{
    PointRecord p;
    p.kind = j.at("kind").get<std::string>();
    p.L = get_num(j.at("L"));
    p.lambda = get_num(j.at("lambda"));
    p.R = get_num(j.at("R"));
    p.estimate = get_num(j.at("estimate"));
    p.std_err = get_num(j.at("stderr"));
    p.reps = j.at("reps").get<std::size_t>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.status = j.at("status").get<std::string>();
    if (j.contains("message")) p.message = j["message"].get<std::string>();
    for (const auto& [k, v] : j.at("extra").items()) p.extra.emplace_back(k, get_num(v));
    return p;
}

std::string csv_num(double x)
{
    if (std::isnan(x)) return "nan";
    return format_double(x);
}

}  // namespace

OutputPaths output_paths(const std::string& out)
{
    if (ends_with(out, ".csv")) return {out, out.substr(0, out.size() - 4) + ".jsonl"};
    if (ends_with(out, ".jsonl")) return {out.substr(0, out.size() - 6) + ".csv", out};
    return {out + ".csv", out + ".jsonl"};
}

void check_writable(const OutputPaths& p, bool force)
{
    if (force) return;
    for (const auto& f : {p.csv, p.jsonl})
        if (fs::exists(f)) throw OutputExists("output file " + f + " exists (use --force to overwrite)");
}

std::string header_json(const ExperimentSpec& spec, const std::string& version)
{
    ojson j;
    j["record"] = "header";
    j["schema"] = "hypersticks.result";
    j["schema_version"] = kSchemaVersion;
    j["version"] = version;
    ojson s = ojson::object();
    for (const auto& [k, v] : spec_items(spec)) s[k] = v;
    j["spec"] = s;
    return j.dump();
}

std::string point_json(const PointRecord& p, const char* record) { return point_obj(p, record).dump(); }

std::string summary_json(const Extras& summary)
{
    ojson j;
    j["record"] = "summary";
    ojson v = ojson::object();
    for (const auto& [k, x] : summary) v[k] = num(x);
    j["values"] = v;
    return j.dump();
}

std::string timing_json(double wall_seconds)
{
    ojson j;
    j["record"] = "timing";
    j["wall_seconds"] = wall_seconds;
    return j.dump();
}

ResultSink::ResultSink(OutputPaths paths, bool force) : paths_(std::move(paths))
{
    check_writable(paths_, force);
    jsonl_.open(paths_.jsonl, std::ios::out | std::ios::trunc | std::ios::binary);
    if (!jsonl_) throw IoError("cannot open " + paths_.jsonl + " for writing");
}

void ResultSink::line(const std::string& s)
{
    jsonl_ << s << '\n';
    jsonl_.flush();
    if (!jsonl_) throw IoError("write failed on " + paths_.jsonl);
    ++written_;
}

void ResultSink::header(const ExperimentSpec& spec, const std::string& version) { line(header_json(spec, version)); }
void ResultSink::point(const PointRecord& p) { line(point_json(p, "point")); }
void ResultSink::step(const PointRecord& p) { line(point_json(p, "step")); }
void ResultSink::summary(const Extras& s) { line(summary_json(s)); }
void ResultSink::timing(double wall_seconds) { line(timing_json(wall_seconds)); }

void ResultSink::finish(const ResultRecord& r)
{
    jsonl_.close();
    std::ofstream os(paths_.csv, std::ios::out | std::ios::trunc | std::ios::binary);
    if (!os) throw IoError("cannot open " + paths_.csv + " for writing");
    write_csv(os, r);
    if (!os) throw IoError("write failed on " + paths_.csv);
}

void write_jsonl(std::ostream& os, const ResultRecord& r)
{
    os << header_json(r.spec, r.version) << '\n';
    for (const auto& p : r.points) os << point_json(p, "point") << '\n';
    for (const auto& p : r.steps) os << point_json(p, "step") << '\n';
    os << summary_json(r.summary) << '\n';
    os << timing_json(r.wall_seconds) << '\n';
}

ResultRecord read_jsonl(std::istream& is)
{
    ResultRecord r;
    std::string ln;
    bool header = false;
    std::size_t lineno = 0;
    while (std::getline(is, ln)) {
        ++lineno;
        if (ln.empty()) continue;
        ojson j;
        try {
            j = ojson::parse(ln);
        } catch (const std::exception& e) {
            throw IoError("line " + std::to_string(lineno) + ": malformed record: " + e.what());
        }
        const std::string kind = j.value("record", "");
        if (kind == "header") {
            if (j.value("schema_version", 0) != kSchemaVersion)
                throw IoError("unsupported schema_version on line " + std::to_string(lineno));
            r.version = j.value("version", "");
            for (const auto& [k, v] : j.at("spec").items()) set_spec_item(r.spec, k, v.get<std::string>());
            header = true;
        } else if (kind == "point") {
            r.points.push_back(point_from(j));
        } else if (kind == "step") {
            r.steps.push_back(point_from(j));
        } else if (kind == "summary") {
            for (const auto& [k, v] : j.at("values").items()) r.summary.emplace_back(k, get_num(v));
        } else if (kind == "timing") {
            r.wall_seconds = j.at("wall_seconds").get<double>();
        } else {
            throw IoError("line " + std::to_string(lineno) + ": unknown record type '" + kind + "'");
        }
    }
    if (!header) throw IoError("missing header record");
    return r;
}

ResultRecord read_jsonl_file(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path);
    return read_jsonl(is);
}

void write_csv(std::ostream& os, const ResultRecord& r)
{
    os << "# " << r.version << '\n';
    for (const auto& [k, v] : spec_items(r.spec)) os << "# " << k << '=' << v << '\n';
    os << "L,lambda,R,estimate,stderr,reps,seed\n";
    for (const auto& p : r.points) {
        os << csv_num(p.L) << ',' << csv_num(p.lambda) << ',' << csv_num(p.R) << ',' << csv_num(p.estimate) << ','
           << csv_num(p.std_err) << ',' << p.reps << ',' << p.seed << '\n';
    }
    for (const auto& [k, v] : r.summary) os << k << ',' << csv_num(v) << '\n';
}

void emit_plot_data(const ResultRecord& r, const std::string& path, bool force)
{
    if (!force && fs::exists(path)) throw OutputExists("output file " + path + " exists (use --force to overwrite)");
    std::ofstream os(path, std::ios::out | std::ios::trunc | std::ios::binary);
    if (!os) throw IoError("cannot open " + path + " for writing");
    write_csv(os, r);
    if (!os) throw IoError("write failed on " + path);
}

}  // namespace hs
