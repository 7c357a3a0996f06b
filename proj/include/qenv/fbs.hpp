#pragma once

// Forward-backward splitting for  penalty(x) + ||A x - b||^2.

#include "qenv/core.hpp"
#include "qenv/penalties.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace qenv {

struct StartZero {};
struct StartLeastSquares {};
struct StartGiven {
  SignalVector x;
};
using StartPoint = std::variant<StartZero, StartLeastSquares, StartGiven>;

struct SolverConfig {
  std::optional<double> step;  // empty: default_step_size(A)
  int max_iter = 1000;
  double stop_tol = 1e-10;
  StartPoint start = StartZero{};
};

struct SolveResult {
  SignalVector x_final;
  std::vector<double> objective_trace;  // objective at the start and after each step
  double stationarity_residual = 0.0;
  bool stationarity_exact = true;  // false: fixed-point residual used instead of dist(z, dG(x))
  double shadow_norm = 0.0;        // ||z|| at x_final
  SupportSet support;
  int iterations_used = 0;
  bool converged = false;  // iterate-change criterion fired before max_iter
  double step = 0.0;
};

inline constexpr double kSupportThreshold = 1e-6;

/// Raised when the objective becomes non-finite; carries the trace so far.
class SolverDiverged : public std::runtime_error {
 public:
  SolverDiverged(const std::string& what, std::vector<double> trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const std::vector<double>& trace() const noexcept { return trace_; }

 private:
  std::vector<double> trace_;
};

/// 0.45 / ||A||^2 capped at 0.45: the objective carries no 1/2, so the
/// gradient 2 A^T (A x - b) is 2||A||^2-Lipschitz, and envelope proxes need
/// t < 1/2.
inline double default_step_size(const SensingMatrix& a) {
  const double l = a.op_norm() * a.op_norm();
  if (!(l > 0.0)) return 0.45;
  return std::min(0.45 / l, 0.45);
}

/// penalty(x) + ||A x - b||^2; +infinity propagates from the indicator.
inline double objective_value(const SensingMatrix& a, const SignalVector& b,
                              const PenaltyKind& kind, const SignalVector& x) {
  const double p = penalty_eval(kind, x);
  if (std::isinf(p)) return p;
  return p + (a.entries() * x - b).squaredNorm();
}

/// z = (I - A^T A) x + A^T b.
inline SignalVector shadow_point(const SensingMatrix& a, const SignalVector& b,
                                 const SignalVector& x) {
  if (x.size() != a.n() || b.size() != a.m())
    throw std::invalid_argument("shadow_point: dimension mismatch");
  return x - a.entries().transpose() * (a.entries() * x - b);
}

inline SolveResult fbs_solve(const SensingMatrix& a, const SignalVector& b,
                             const PenaltyKind& kind, const SolverConfig& cfg = {}) {
  if (b.size() != a.m()) throw std::invalid_argument("fbs_solve: b length != m");
  validate(kind, a.n());
  if (cfg.max_iter < 1) throw std::invalid_argument("fbs_solve: max_iter must be >= 1");
  const double t = cfg.step ? *cfg.step : default_step_size(a);
  if (!(t > 0.0)) throw std::invalid_argument("fbs_solve: step must be > 0");
  if (is_quad_env(kind) && !(t < 0.5))
    throw std::invalid_argument("fbs_solve: envelope penalties require step < 1/2");

  const Matrix& am = a.entries();
  SignalVector x;
  if (std::holds_alternative<StartZero>(cfg.start)) {
    x = SignalVector::Zero(a.n());
  } else if (std::holds_alternative<StartLeastSquares>(cfg.start)) {
    x = least_squares_solution(a, b);
  } else {
    x = std::get<StartGiven>(cfg.start).x;
    if (x.size() != a.n()) throw std::invalid_argument("fbs_solve: start length != n");
  }

  SolveResult res;
  res.step = t;
  res.objective_trace.reserve(static_cast<std::size_t>(cfg.max_iter) + 1);
  res.objective_trace.push_back(objective_value(a, b, kind, x));

  auto forward = [&](const SignalVector& v) -> SignalVector {
    return v - (2.0 * t) * (am.transpose() * (am * v - b));
  };

  for (int it = 0; it < cfg.max_iter; ++it) {
    SignalVector next = penalty_prox(kind, forward(x), t);
    const double obj = objective_value(a, b, kind, next);
    res.objective_trace.push_back(obj);
    res.iterations_used = it + 1;
    if (!std::isfinite(obj))
      throw SolverDiverged("fbs_solve: non-finite objective", res.objective_trace);
    const double change = (next - x).norm();
    const double scale = 1.0 + x.norm();
    x = std::move(next);
    if (change <= cfg.stop_tol * scale) {
      res.converged = true;
      break;
    }
  }

  const SignalVector z = shadow_point(a, b, x);
  res.shadow_norm = z.norm();
  const bool in_domain = !std::holds_alternative<QuadEnvPK>(kind) ||
                         static_cast<Eigen::Index>(cardinality(x)) <= std::get<QuadEnvPK>(kind).k;
  if (is_quad_env(kind) && in_domain) {
    res.stationarity_residual = subgradient_distance(kind, x, z);
  } else {
    res.stationarity_residual = (x - penalty_prox(kind, forward(x), t)).norm();
    res.stationarity_exact = !is_quad_env(kind);
  }
  res.support = SupportSet::of(x, kSupportThreshold);
  res.x_final = std::move(x);
  return res;
}

}  // namespace qenv
