#pragma once

#include <optional>
#include <vector>

#include "sundman/core.hpp"

namespace sundman {

struct StatePoint {
  double x = 0, y = 0, yp = 0;
};

struct Trajectory {
  std::vector<StatePoint> samples;  // samples[0] is the initial condition
  double step = 0;
  StatePoint init;
  bool left_box = false;  // stopped early at the box boundary
};

struct Tolerances {
  double drift = 1e-6;
  double family = 1e-8;
  double linearity = 1e-4;
};

struct VerificationReport {
  std::optional<double> max_drift, max_ode_residual, max_utt;
  bool drift_pass = false, residual_pass = false, utt_pass = false;
  Tolerances tol;
  /// true when every check that ran passed
  bool pass() const;
};

/// Classical RK4 on (y, y'). Throws SingularEncounter when the right-hand side
/// stops being finite or |y''| exceeds 1e8. With `stay_inside`, integration
/// stops (without error) at the first step that leaves the box.
Trajectory integrate_ode(const OdeQuad& ode, StatePoint init, double step, int n,
                         const SampleBox* stay_inside = nullptr);

/// max |w - w0| / (1 + |w0|) with w = A y' + B.
double first_integral_drift(const FirstIntegral& fi, const Trajectory& traj);

/// Largest scaled ODE residual of curves of the family through sampled box
/// points (the remaining constants drawn at random). Uses the degenerate
/// member when mu is only implicit.
double solution_family_residual(const OdeQuad& ode, const SolutionFamily& family, const SampleBox& box);

/// Compares two implicit families G(x, y; K1, K2) = 0, each affine in its two
/// arbitrary constants (sorted by name). They describe the same curves when
/// (P0, P1, P2) = m(x, y) M (Q0, Q1, Q2) for a constant invertible M, found
/// as the null vector of the linear conditions P x (M Q) = 0 at box points.
/// Returns the relative size of the smallest singular value, or infinity when
/// the null vector is singular.
double locus_family_mismatch(const expr::Expr& G1, const expr::Expr& G2, const SampleBox& box);

/// Max |u_tt| by second differences of u = psi along the trajectory, with t
/// accumulated by the trapezoidal rule from dt = phi dx.
double linearity_check(const SundmanTransform& st, const Trajectory& traj);

}  // namespace sundman
