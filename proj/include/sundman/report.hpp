#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "sundman/geodesics.hpp"
#include "sundman/pipeline.hpp"

namespace sundman {

inline constexpr int kSchemaVersion = 1;

/// Problem description as read from JSON:
///
///   { "schema_version": 1, "name": "...", "F": "...", "F1": "...", "F2": "...",
///     "constants": ["b"], "box": {"x": [lo, hi], "y": [lo, hi]}, "seed": 42,
///     "options": { "tol": 1e-9, "samples": 64, "drift_tol": 1e-6,
///                  "family_tol": 1e-8, "linearity_tol": 1e-4,
///                  "g_ansatz": ["x^2"], "eta": ["identity", "reciprocal"] },
///     "trajectory": { "init": [x0, y0, yp0], "step": 1e-3, "steps": 500 } }
///
/// Everything except F, F1, F2 is optional.
struct ProblemFile {
  std::string name;
  std::string F, F1, F2;
  std::set<std::string> constants;
  std::map<std::string, Interval> box;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<int> samples;
  Tolerances verify_tol;
  std::vector<std::string> g_ansatz;
  std::vector<std::string> eta;
  std::optional<StatePoint> init;
  double step = 1e-3;
  int steps = 500;
};

/// Throws InvalidInput naming the offending field.
ProblemFile problem_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ProblemFile& p);
/// Reads and validates a problem file; throws InvalidInput.
ProblemFile load_problem(const std::string& path);

struct PreparedProblem {
  OdeQuad ode;
  PipelineOptions options;
  VerifyOptions verify;
};

/// Parses the expressions and builds the run options; throws InvalidInput.
PreparedProblem prepare(const ProblemFile& p);

/// Report for a pipeline run. Stage timings appear only with `timing`, so
/// that the default output is byte-for-byte reproducible.
nlohmann::json report_json(const PipelineRun& run, const std::string& command, bool timing = false);

/// Pipeline report plus a "geodesic" section (profile, curvature, ...).
nlohmann::json geodesic_report_json(const GeodesicResult& r, bool timing = false);

/// Short human-readable rendering of a report.
std::string report_text(const nlohmann::json& report);

/// 0 success, 2 not S-linearizable, 3 stage failure.
int exit_code(const PipelineRun& run);

/// {"error": {"kind": ..., "message": ...}} with extra fields where known.
nlohmann::json error_json(const std::exception& e);

/// Every expression string in a report, keyed by its JSON pointer.
std::map<std::string, std::string> report_expressions(const nlohmann::json& report);

/// Names to read as arbitrary constants when re-parsing report expressions.
std::set<std::string> report_constants(const nlohmann::json& report);

}  // namespace sundman
