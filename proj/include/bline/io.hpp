#pragma once

#include <iosfwd>
#include <stdexcept>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bline/config.hpp"
#include "bline/consensus.hpp"
#include "bline/evaluation.hpp"

namespace bline::io {

// Parse failure with the 1-based input line and the offending field.
struct ParseError : std::runtime_error {
    ParseError(std::size_t line, std::string field_name, const std::string& message)
        : std::runtime_error("line " + std::to_string(line) +
                             (field_name.empty() ? "" : ", field '" + field_name + "'") + ": " +
                             message),
          line_no(line),
          field(std::move(field_name)) {}

    std::size_t line_no;
    std::string field;
};

struct ParseOptions {
    bool strict = false;  // reject unknown fields instead of warning
};

struct Diagnostics {
    std::vector<std::string> warnings;
};

std::string to_string(Split split);
Split split_from_string(const std::string& s, std::size_t line_no);

// Opinion stream, one JSON record per line:
//   {"case_id": "...", "annotator_id": "...", "timestamp": 12345,
//    "split": "train"|"test", "lines": [[x1,y1,x2,y2], ...]}
// Coordinates must lie in [0,100]; zero-length lines are rejected.
std::vector<Opinion> parse_opinions(std::istream& in, const ParseOptions& options = {},
                                    Diagnostics* diagnostics = nullptr);
std::vector<Opinion> load_opinions(const std::string& path, const ParseOptions& options = {},
                                   Diagnostics* diagnostics = nullptr);
void write_opinions(std::ostream& out, std::span<const Opinion> opinions);
void save_opinions(const std::string& path, std::span<const Opinion> opinions);

// Consensus records: {"case_id": "...", "contributing_annotators": n,
//                     "lines": [[x1,y1,x2,y2], ...]}
std::vector<ConsensusAnnotation> parse_consensus(std::istream& in,
                                                 const ParseOptions& options = {},
                                                 Diagnostics* diagnostics = nullptr);
void write_consensus(std::ostream& out, std::span<const ConsensusAnnotation> annotations);

// Reference line sets per case, accepting either wire format (sniffed by
// the presence of "annotator_id"). Later records for a case replace earlier
// ones.
std::map<std::string, std::vector<LineSegment>> load_reference_lines(
    const std::string& path, const ParseOptions& options = {});

// Flat `key = value` run configuration (# comments, strings quoted, the
// Qscore window accepts "all"). Unknown keys follow the strict/warn rule.
RunConfig parse_config(std::istream& in, const ParseOptions& options = {},
                       Diagnostics* diagnostics = nullptr);
RunConfig load_config(const std::string& path, const ParseOptions& options = {},
                      Diagnostics* diagnostics = nullptr);

// Seed override applied to defaults when the environment variable
// BLINE_SEED is set; explicit config values still win.
std::optional<std::uint64_t> env_seed_override();

// report.json: schema_version, resolved config, results. Deterministic for
// identical inputs (no timestamps, stable key order, shortest-round-trip
// floats).
void write_report(std::ostream& out, const eval::EvalReport& report, const RunConfig& config);

void write_learning_curve_csv(std::ostream& out, std::span<const eval::LearningCurveBin> curve);
void write_bootstrap_csv(std::ostream& out, std::span<const double> replicates);

// Standalone SVG rendering of the learning curve: binned means with
// standard-error bars and an optional horizontal marker for the expert
// mean.
void write_learning_curve_svg(std::ostream& out, std::span<const eval::LearningCurveBin> curve,
                              std::optional<double> expert_mean);

// Shortest round-trip decimal form of a double (the formatting used in all
// CSV output).
std::string format_double(double v);

}  // namespace bline::io
