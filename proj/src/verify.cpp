#include "sundman/verify.hpp"

#include <Eigen/Dense>
#include <limits>
#include <cmath>
#include <array>
#include <random>

#include "sundman/diff.hpp"
#include "sundman/errors.hpp"
#include "sundman/eval.hpp"

namespace sundman {

using namespace expr;

bool VerificationReport::pass() const {
  return (!max_drift || drift_pass) && (!max_ode_residual || residual_pass) && (!max_utt || utt_pass);
}

namespace {

constexpr double kSingularAccel = 1e8;

EvalPoint at(double x, double y) { return EvalPoint{}.set("x", x).set("y", y); }

}  // namespace

Trajectory integrate_ode(const OdeQuad& ode, StatePoint init, double step, int n, const SampleBox* stay_inside) {
  if (!(step > 0 && step <= 0.01)) throw std::invalid_argument("step must lie in (0, 0.01]");
  if (n < 1) throw std::invalid_argument("need at least one step");
  // state (y, y'); y'' = -(F2 y'^2 + F1 y' + F)
  auto rhs = [&](double x, const Eigen::Vector2d& s) -> Eigen::Vector2d {
    EvalPoint p = at(x, s(0));
    double ypp = -(evaluate(ode.F2, p) * s(1) * s(1) + evaluate(ode.F1, p) * s(1) + evaluate(ode.F, p));
    if (!std::isfinite(ypp) || std::fabs(ypp) > kSingularAccel) throw NonFinite("acceleration blow-up");
    return {s(1), ypp};
  };
  Trajectory traj;
  traj.step = step;
  traj.init = init;
  traj.samples.reserve(static_cast<std::size_t>(n) + 1);
  traj.samples.push_back(init);
  auto outside = [&](double x, double y) {
    if (!stay_inside) return false;
    Interval ix = stay_inside->interval("x"), iy = stay_inside->interval("y");
    return x < ix.lo || x > ix.hi || y < iy.lo || y > iy.hi;
  };
  Eigen::Vector2d s(init.y, init.yp);
  double x = init.x;
  for (int i = 0; i < n; ++i) {
    try {
      Eigen::Vector2d k1 = rhs(x, s);
      Eigen::Vector2d k2 = rhs(x + step / 2, s + step / 2 * k1);
      Eigen::Vector2d k3 = rhs(x + step / 2, s + step / 2 * k2);
      Eigen::Vector2d k4 = rhs(x + step, s + step * k3);
      s += step / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
      if (!s.allFinite()) throw NonFinite("state overflow");
    } catch (const Error& e) {
      throw SingularEncounter("singular approach after sample " + std::to_string(i) + " (x = " +
                                  std::to_string(x) + "): " + e.what(),
                              i);
    }
    x = init.x + (i + 1) * step;
    if (outside(x, s(0))) {
      traj.left_box = true;
      break;
    }
    traj.samples.push_back({x, s(0), s(1)});
  }
  return traj;
}

double first_integral_drift(const FirstIntegral& fi, const Trajectory& traj) {
  auto w = [&](const StatePoint& s) {
    EvalPoint p = at(s.x, s.y);
    return evaluate(fi.A, p) * s.yp + evaluate(fi.B, p);
  };
  const double w0 = w(traj.samples.front());
  double worst = 0;
  std::size_t failed = 0;
  for (const auto& s : traj.samples) {
    try {
      worst = std::max(worst, std::fabs(w(s) - w0) / (1 + std::fabs(w0)));
    } catch (const Error&) {
      ++failed;
    }
  }
  if (failed * 10 > traj.samples.size())
    throw DomainError("first integral undefined on " + std::to_string(failed) + " of " +
                      std::to_string(traj.samples.size()) + " samples");
  return worst;
}

double solution_family_residual(const OdeQuad& ode, const SolutionFamily& family, const SampleBox& box) {
  Expr rhs = family.mu_implicit ? family.degenerate_rhs.value_or(family.rhs) : family.rhs;
  if (depends_on(rhs, "mu")) throw ImplicitSolveFailure("family has no closed-form mu");
  Expr G = family.lhs - rhs;
  auto consts = arbitrary_constants(G);
  if (consts.empty()) throw ImplicitSolveFailure("family carries no free constant");
  // the first constant (C1/c1) is fitted through the sample point, the rest are random
  const std::string solved = *consts.begin();
  Expr gx = differentiate(G, "x"), gy = differentiate(G, "y");
  Expr gxx = differentiate(gx, "x"), gxy = differentiate(gx, "y"), gyy = differentiate(gy, "y");

  std::mt19937_64 rng(box.seed ^ 0xFA317ull);
  auto uniform = [&] { return 0.5 + static_cast<double>(rng() >> 11) * 0x1.0p-53; };  // [0.5, 1.5)
  double worst = 0;
  int used = 0, failed = 0;
  for (auto p : box.draw({"x", "y"})) {
    for (const auto& c : consts)
      if (c != solved) p.values[c] = uniform();
    try {
      p.values[solved] = 0;
      double g0 = evaluate(G, p);
      p.values[solved] = 1;
      double g1 = evaluate(G, p);
      if (std::fabs(g1 - g0) < 1e-12) throw ImplicitSolveFailure("constant does not enter the family");
      p.values[solved] = -g0 / (g1 - g0);
      double Gy = evaluate(gy, p);
      if (std::fabs(Gy) < 1e-10) throw ImplicitSolveFailure("psi_y vanishes on the curve");
      double yp = -evaluate(gx, p) / Gy;
      double ypp = -(evaluate(gxx, p) + 2 * evaluate(gxy, p) * yp + evaluate(gyy, p) * yp * yp) / Gy;
      double t2 = evaluate(ode.F2, p) * yp * yp, t1 = evaluate(ode.F1, p) * yp, t0 = evaluate(ode.F, p);
      double res = std::fabs(ypp + t2 + t1 + t0) / (1 + std::fabs(ypp) + std::fabs(t2) + std::fabs(t1) + std::fabs(t0));
      worst = std::max(worst, res);
      ++used;
    } catch (const ImplicitSolveFailure&) {
      ++failed;
    } catch (const Error&) {
      ++failed;
    }
  }
  if (used == 0) throw ImplicitSolveFailure("no sample point gave a regular implicit curve");
  if (failed * 10 > used + failed)
    throw ImplicitSolveFailure(std::to_string(failed) + " sample points had no regular implicit curve");
  return worst;
}

namespace {

std::array<std::string, 2> two_constants(const Expr& G) {
  auto cs = arbitrary_constants(G);
  if (cs.size() != 2) throw ImplicitSolveFailure("family must carry exactly two constants");
  return {*cs.begin(), *std::next(cs.begin())};
}

Eigen::Vector3d affine_parts(const Expr& G, const std::array<std::string, 2>& cs, EvalPoint p) {
  p.values[cs[0]] = 0;
  p.values[cs[1]] = 0;
  double p0 = evaluate(G, p);
  p.values[cs[0]] = 1;
  double p1 = evaluate(G, p) - p0;
  p.values[cs[0]] = 0;
  p.values[cs[1]] = 1;
  double p2 = evaluate(G, p) - p0;
  return {p0, p1, p2};
}

}  // namespace

double locus_family_mismatch(const Expr& G1, const Expr& G2, const SampleBox& box) {
  auto c1 = two_constants(G1), c2 = two_constants(G2);
  std::vector<Eigen::Matrix<double, 3, 9>> blocks;
  for (const auto& pt : box.draw({"x", "y"})) {
    Eigen::Vector3d P, Q;
    try {
      P = affine_parts(G1, c1, pt).normalized();
      Q = affine_parts(G2, c2, pt).normalized();
    } catch (const Error&) {
      continue;
    }
    if (!P.allFinite() || !Q.allFinite()) continue;
    // (P x MQ)_i = P_j (MQ)_k - P_k (MQ)_j, with vec(M) row-major
    Eigen::Matrix<double, 3, 9> b = Eigen::Matrix<double, 3, 9>::Zero();
    for (int i = 0; i < 3; ++i) {
      int j = (i + 1) % 3, k = (i + 2) % 3;
      for (int c = 0; c < 3; ++c) {
        b(i, 3 * k + c) += P(j) * Q(c);
        b(i, 3 * j + c) -= P(k) * Q(c);
      }
    }
    blocks.push_back(b);
  }
  if (blocks.size() < 8) throw ImplicitSolveFailure("too few regular sample points to compare families");
  Eigen::MatrixXd A(3 * blocks.size(), 9);
  for (std::size_t i = 0; i < blocks.size(); ++i) A.block<3, 9>(3 * static_cast<Eigen::Index>(i), 0) = blocks[i];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  Eigen::VectorXd m = svd.matrixV().col(8);
  Eigen::Matrix3d M;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) M(r, c) = m(3 * r + c);
  if (std::fabs(M.determinant()) < 1e-6) return std::numeric_limits<double>::infinity();
  const auto& sv = svd.singularValues();
  return sv(8) / sv(0);
}

double linearity_check(const SundmanTransform& st, const Trajectory& traj) {
  const auto& s = traj.samples;
  if (s.size() < 3) throw std::invalid_argument("trajectory too short for second differences");
  std::vector<double> t(s.size()), u(s.size()), phi(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    EvalPoint p = at(s[i].x, s[i].y);
    phi[i] = evaluate(st.phi, p);
    u[i] = evaluate(st.psi, p);
    if (phi[i] == 0 || (i > 0 && (phi[i] > 0) != (phi[0] > 0)))
      throw NonMonotoneT("phi changes sign along the trajectory at x = " + std::to_string(s[i].x));
  }
  t[0] = 0;
  for (std::size_t i = 1; i < s.size(); ++i) t[i] = t[i - 1] + 0.5 * (phi[i - 1] + phi[i]) * (s[i].x - s[i - 1].x);
  double worst = 0;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    double h1 = t[i] - t[i - 1], h2 = t[i + 1] - t[i];
    double utt = 2 * ((u[i + 1] - u[i]) / h2 - (u[i] - u[i - 1]) / h1) / (h1 + h2);
    worst = std::max(worst, std::fabs(utt));
  }
  return worst;
}

}  // namespace sundman
