#include "sundman/pipeline.hpp"

#include <chrono>
#include <functional>

#include "sundman/errors.hpp"

namespace sundman {

namespace {

const char* const kStageNames[] = {"classify", "criterion", "integral", "transform", "solve", "verify"};

bool inside(const StatePoint& s, const SampleBox& box) {
  Interval ix = box.interval("x"), iy = box.interval("y");
  return s.x >= ix.lo && s.x <= ix.hi && s.y >= iy.lo && s.y <= iy.hi;
}

StatePoint default_init(const SampleBox& box) {
  Interval ix = box.interval("x"), iy = box.interval("y");
  return {ix.lo + 0.1 * (ix.hi - ix.lo), iy.mid(), 0.25};
}

}  // namespace

std::string to_string(Stage s) { return kStageNames[static_cast<int>(s)]; }

Stage stage_from_string(const std::string& s) {
  for (int i = 0; i < 6; ++i)
    if (s == kStageNames[i]) return static_cast<Stage>(i);
  throw std::invalid_argument("unknown stage '" + s + "'");
}

bool PipelineRun::ok() const { return failure() == nullptr; }

bool PipelineRun::not_linearizable() const { return cls && cls->kind == Case::NotSLinearizable; }

const StageStatus* PipelineRun::failure() const {
  for (const auto& s : stages)
    if (s.status != "ok" && s.status != "skipped") return &s;
  return nullptr;
}

PipelineRun run_pipeline(const OdeQuad& ode, const PipelineOptions& options, Stage last,
                         const VerifyOptions& verify) {
  PipelineRun run;
  run.ode = ode;
  const SampleBox& box = options.box;
  bool stopped = false;

  auto stage = [&](Stage s, const std::function<void(StageStatus&)>& body) {
    if (s > last) return;
    StageStatus st;
    st.stage = to_string(s);
    if (stopped) {
      st.status = "skipped";
      run.stages.push_back(st);
      return;
    }
    auto t0 = std::chrono::steady_clock::now();
    st.status = "ok";
    try {
      body(st);
    } catch (const Error& e) {
      st.status = "failed";
      st.error_kind = e.kind();
      st.message = e.what();
    } catch (const std::exception& e) {
      st.status = "failed";
      st.error_kind = "InternalError";
      st.message = e.what();
    }
    st.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (st.status != "ok") stopped = true;
    run.stages.push_back(st);
  };

  stage(Stage::Classify, [&](StageStatus& st) {
    run.cls = classify(ode, box);
    if (run.cls->kind == Case::NotSLinearizable) {
      st.status = "not-linearizable";
      st.error_kind = "NotSLinearizable";
      st.message = run.cls->failing + " is not identically zero";
    }
  });
  stage(Stage::Criterion, [&](StageStatus&) { run.aux = solve_auxiliary_g(ode, *run.cls, options); });
  stage(Stage::Integral, [&](StageStatus&) {
    run.fi = build_first_integral(ode, *run.aux, box);
    try {
      run.fi_mr = build_first_integral_mr(ode, *run.cls, *run.aux, box);
      run.affine = fit_affine(*run.fi, *run.fi_mr, box);
    } catch (const Error& e) {
      run.mr_error = e.what();
    }
  });
  stage(Stage::Transform, [&](StageStatus&) {
    run.reduction = reduce_first_order(*run.fi, box);
    run.transform = build_transform(*run.fi, run.reduction->I, options);
  });
  stage(Stage::Solve, [&](StageStatus&) { run.family = general_solution(*run.transform, box); });
  stage(Stage::Verify, [&](StageStatus& st) {
    VerificationReport rep;
    rep.tol = verify.tol;
    StatePoint init = verify.init.value_or(default_init(box));
    run.trajectory_init = init;
    if (!inside(init, box)) throw DomainError("trajectory start lies outside the sample box");
    Trajectory traj = integrate_ode(ode, init, verify.step, verify.steps, &box);
    if (traj.samples.size() < 3) throw DomainError("trajectory leaves the sample box immediately");
    run.trajectory_samples = traj.samples.size();
    rep.max_drift = first_integral_drift(*run.fi, traj);
    rep.drift_pass = *rep.max_drift <= rep.tol.drift;
    rep.max_ode_residual = solution_family_residual(ode, *run.family, box);
    rep.residual_pass = *rep.max_ode_residual <= rep.tol.family;
    rep.max_utt = linearity_check(*run.transform, traj);
    rep.utt_pass = *rep.max_utt <= rep.tol.linearity;
    run.verification = rep;
    if (!rep.pass()) {
      st.status = "failed";
      st.error_kind = "VerificationFailed";
      st.message = "a numeric check exceeded its tolerance";
    }
  });
  return run;
}

}  // namespace sundman
