#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sundman/pipeline.hpp"

namespace sundman {

/// Surface of revolution (f(y) cos x, f(y) sin x, g(y)) with unit-speed
/// profile (f, g).
struct Profile {
  std::string name;
  expr::Expr f;
  std::optional<double> expected_curvature;
  SampleBox box;
  std::optional<StatePoint> init;  // trajectory start for verification
  std::optional<expr::Expr> height;  // g(y) of the embedding, when real and known
};

/// cone, plane, sphere, conic, hyperboloid, pseudosphere
std::vector<std::string> profile_names();
/// Catalog lookup; `params` binds arbitrary constants (the plane offset b).
Profile profile_by_name(const std::string& name, const std::map<std::string, double>& params = {});
/// Custom profile from an expression in y.
Profile profile_from_expr(const std::string& f_text, const std::map<std::string, double>& params = {});

/// y'' - 2 f'/f y'^2 - f f' = 0
OdeQuad geodesic_ode(const Profile& p);

/// Gaussian curvature -f''/f; throws NonConstant when it varies on the box.
double profile_curvature(const Profile& p, const SampleBox& box);

/// kappa = f'^2 - f f'': the criterion reads g'' + g'^2 + kappa = 0.
expr::Expr criterion_constant(const Profile& p);

/// criterion_residual(g) + g'' + g'^2 + kappa for a probe g; identically
/// zero when the reduction holds.
expr::Expr reduction_residual(const Profile& p, const expr::Expr& probe_g);

/// f'^2 <= 1 on the box, i.e. the profile has a real unit-speed companion g.
bool unit_speed(const Profile& p, const SampleBox& box);

struct GeodesicResult {
  Profile profile;
  OdeQuad ode;
  PipelineRun run;
  std::optional<double> curvature;
  expr::Expr kappa;
  bool kappa_constant = false;
  bool reduction_holds = false;
  bool unit_speed = false;
};

/// Full pipeline plus verification; stage failures stay in `run.stages`.
GeodesicResult analyze_geodesics(const Profile& p);

/// As analyze_geodesics, but throws StageFailure naming the stage
/// when any stage fails.
GeodesicResult solve_geodesics(const Profile& p);

/// Embeds trajectory samples on the surface and returns max |n . r| for the
/// best-fitting plane through the origin (0 for great circles on the sphere).
/// Needs the profile height; throws std::invalid_argument without it.
double plane_through_origin_deviation(const Profile& p, const Trajectory& traj);

}  // namespace sundman
