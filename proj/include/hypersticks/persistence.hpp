// Result persistence: line-delimited JSON records and the CSV projection.
//
// JSONL layout, one object per line:
//   {"record":"header","schema":"hypersticks.result","schema_version":1,...,"spec":{...}}
//   {"record":"point",...}      one per (L, lambda, R) point
//   {"record":"step",...}       intermediate evaluations
//   {"record":"summary",...}
//   {"record":"timing","wall_seconds":...}
// Everything except the timing record is a deterministic function of (spec, seed).
#pragma once

#include <fstream>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "hypersticks/experiments.hpp"

namespace hs {

inline constexpr int kSchemaVersion = 1;

struct OutputExists : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OutputPaths {
    std::string csv;
    std::string jsonl;
};
// "run.csv" -> {run.csv, run.jsonl}; "run.jsonl" -> {run.csv, run.jsonl}; other
// names get both extensions appended.
OutputPaths output_paths(const std::string& out);
// Throws OutputExists unless force.
void check_writable(const OutputPaths& p, bool force);

std::string header_json(const ExperimentSpec& spec, const std::string& version);
std::string point_json(const PointRecord& p, const char* record = "point");
std::string summary_json(const Extras& summary);
std::string timing_json(double wall_seconds);

// Streams JSONL records as they are produced; the CSV is written by finish().
class ResultSink {
public:
    ResultSink(OutputPaths paths, bool force);
    void header(const ExperimentSpec& spec, const std::string& version);
    void point(const PointRecord& p);
    void step(const PointRecord& p);
    void summary(const Extras& s);
    void timing(double wall_seconds);
    void finish(const ResultRecord& r);
    std::size_t records_written() const { return written_; }
    const OutputPaths& paths() const { return paths_; }

private:
    void line(const std::string& s);
    OutputPaths paths_;
    std::ofstream jsonl_;
    std::size_t written_ = 0;
};

void write_jsonl(std::ostream& os, const ResultRecord& r);
ResultRecord read_jsonl(std::istream& is);
ResultRecord read_jsonl_file(const std::string& path);

// CSV projection: comment lines echoing the spec, the column header
// L,lambda,R,estimate,stderr,reps,seed, one row per point, then key,value summary rows.
void write_csv(std::ostream& os, const ResultRecord& r);
void emit_plot_data(const ResultRecord& r, const std::string& path, bool force);

}  // namespace hs
