#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sundman/core.hpp"
#include "sundman/verify.hpp"

namespace sundman {

/// Pipeline prefixes, in order.
enum class Stage { Classify, Criterion, Integral, Transform, Solve, Verify };
std::string to_string(Stage s);
Stage stage_from_string(const std::string& s);

struct StageStatus {
  std::string stage;
  std::string status;  // ok | failed | not-linearizable | skipped
  std::string error_kind;
  std::string message;
  double seconds = 0;
};

struct VerifyOptions {
  std::optional<StatePoint> init;  // default: derived from the box
  double step = 1e-3;
  int steps = 500;
  Tolerances tol;
};

struct PipelineRun {
  OdeQuad ode;
  std::optional<Classification> cls;
  std::optional<AuxiliaryData> aux;
  std::optional<FirstIntegral> fi, fi_mr;
  std::optional<AffineFit> affine;
  std::string mr_error;
  std::optional<Reduction> reduction;
  std::optional<SundmanTransform> transform;
  std::optional<SolutionFamily> family;
  std::optional<VerificationReport> verification;
  std::optional<StatePoint> trajectory_init;
  std::size_t trajectory_samples = 0;
  std::vector<StageStatus> stages;

  bool ok() const;
  bool not_linearizable() const;
  /// the first stage that failed, if any
  const StageStatus* failure() const;
};

/// Runs stages up to and including `last`. Stage errors are recorded in
/// `stages` and stop the run; they are not rethrown.
PipelineRun run_pipeline(const OdeQuad& ode, const PipelineOptions& options, Stage last = Stage::Verify,
                         const VerifyOptions& verify = {});

}  // namespace sundman
