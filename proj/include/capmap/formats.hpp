#pragma once

// JSON documents for models, problems, plans and JSON-Lines trace logs.
// Writers are canonical: keys sorted, numbers in shortest round-trip form,
// so equal values always serialize to equal bytes.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "capmap/learning.hpp"
#include "capmap/mapmm.hpp"
#include "capmap/mapmmi.hpp"
#include "capmap/model.hpp"

namespace capmap {

using Json = nlohmann::json;

/// Parses JSON text; errors name `source` and the byte offset.
Json parse_json(const std::string& text, const std::string& source);
Json read_json_file(const std::filesystem::path& path);
/// Two-space indented dump with a trailing newline.
std::string dump_canonical(const Json& doc);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Models: {"agent", "variables", "edges", "cpts": {node: {"parents", "rows":
// [{"config", "a", "b"}]}}}. Loading runs validate_model.
Json save_model(const CapabilityModel& model);
CapabilityModel load_model(const Json& doc);
CapabilityModel load_model_file(const std::filesystem::path& path);

// Capability specs: {"C", "D", "A", "B"} with missing keys read as empty.
Json save_spec(const CapabilitySpec& spec);
CapabilitySpec load_spec(const Json& doc, const std::string& path = "$");
/// Inline form `c, !d -> a, !b`; `true` stands for an empty side.
CapabilitySpec parse_spec(const std::string& text);

// Problems. A human's "model" is an inline model object or a path resolved
// against `base_dir`.
Json save_problem(const MapMmProblem& problem);
MapMmProblem load_problem(const Json& doc, const std::filesystem::path& base_dir = {});
MapMmProblem load_problem_file(const std::filesystem::path& path);

// Traces: one {"observations": [{"true": [...], "false": [...]}, ...]} per line.
struct TraceLineError {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct TraceLoad {
  std::vector<Trace> traces;
  std::vector<TraceLineError> errors;  // only populated in lenient mode
};

std::string save_traces(const std::vector<Trace>& traces);
/// Strict mode throws on the first bad line; lenient mode collects errors and
/// keeps every well-formed line. Blank lines are ignored.
TraceLoad load_traces(std::istream& in, bool lenient = false);

// Plain-text inputs for `model build`: one variable per line, and one
// `from to` (or `from -> to`) edge per line; `#` starts a comment.
std::vector<VarId> load_variable_list(std::istream& in);
std::vector<Edge> load_edge_list(std::istream& in);

Json save_plan(const SearchResult& result);
Json save_conditional_plan(const CondResult& result, std::size_t budget);

}  // namespace capmap
