#pragma once

// The five penalty functionals: l1, mu*card, the K-sparse indicator, and the
// quadratic envelopes of mu*card and of the K-sparse indicator.
//
// Conventions: the envelope Q(f) satisfies Q(f)(x) + ||x||^2 = convex envelope
// of f(x) + ||x||^2, and G = Q(f)/2 + ||.||^2/2 is the convex function whose
// subdifferential characterises stationarity.

#include "qenv/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

namespace qenv {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct L1 {
  double lambda = 0.0;
};
struct Card {
  double mu = 1.0;
};
struct IndicatorPK {
  Eigen::Index k = 0;
};
struct QuadEnvCard {
  double mu = 1.0;
};
struct QuadEnvPK {
  Eigen::Index k = 0;
};

using PenaltyKind = std::variant<L1, Card, IndicatorPK, QuadEnvCard, QuadEnvPK>;

inline std::string penalty_name(const PenaltyKind& kind) {
  return std::visit(
      [](const auto& p) -> std::string {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, L1>) return "l1";
        else if constexpr (std::is_same_v<T, Card>) return "card";
        else if constexpr (std::is_same_v<T, IndicatorPK>) return "pk";
        else if constexpr (std::is_same_v<T, QuadEnvCard>) return "qcard";
        else return "qpk";
      },
      kind);
}

inline bool is_quad_env(const PenaltyKind& kind) {
  return std::holds_alternative<QuadEnvCard>(kind) || std::holds_alternative<QuadEnvPK>(kind);
}

/// Throws std::invalid_argument if the parameters are out of range for a
/// signal of length n.
inline void validate(const PenaltyKind& kind, Eigen::Index n) {
  std::visit(
      [n](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, L1>) {
          if (!(p.lambda >= 0.0) || !std::isfinite(p.lambda))
            throw std::invalid_argument("l1: lambda must be finite and >= 0");
        } else if constexpr (std::is_same_v<T, Card> || std::is_same_v<T, QuadEnvCard>) {
          if (!(p.mu > 0.0) || !std::isfinite(p.mu))
            throw std::invalid_argument("card: mu must be finite and > 0");
        } else {
          if (p.k < 0) throw std::invalid_argument("pk: K must be >= 0");
          if (p.k > n) throw std::invalid_argument("pk: K > n");
        }
      },
      kind);
}

// ---------------------------------------------------------------------------
// Sorted magnitudes and the envelope breakpoint k_*

struct SortedMagnitudes {
  std::vector<Eigen::Index> perm;  // perm[i] = original index of i-th largest |x|
  Vector mags;                     // non-increasing
};

/// Stable sort by decreasing magnitude; ties keep ascending original index.
inline SortedMagnitudes sort_magnitudes(const Vector& x) {
  SortedMagnitudes s;
  s.perm.resize(static_cast<std::size_t>(x.size()));
  std::iota(s.perm.begin(), s.perm.end(), Eigen::Index{0});
  std::stable_sort(s.perm.begin(), s.perm.end(), [&x](Eigen::Index a, Eigen::Index b) {
    return std::abs(x(a)) > std::abs(x(b));
  });
  s.mags.resize(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    s.mags(i) = std::abs(x(s.perm[static_cast<std::size_t>(i)]));
  return s;
}

struct EnvelopeState {
  Eigen::Index k_star = 0;
  std::vector<double> s_values;  // s(1), ..., s(K)
};

/// s(k) = sum_{j > K-k} |x~_j| - k |x~_{K+1-k}| (1-based), and k_* the largest
/// k in 1..K with s(k) >= 0. The scan stops at the first negative value since
/// s is non-increasing.
inline EnvelopeState envelope_state(const SortedMagnitudes& sm, Eigen::Index k) {
  const Eigen::Index n = sm.mags.size();
  if (k < 1 || k > n) throw std::invalid_argument("envelope_state: need 1 <= K <= n");
  std::vector<double> tail(static_cast<std::size_t>(n) + 1, 0.0);
  for (Eigen::Index i = n - 1; i >= 0; --i)
    tail[static_cast<std::size_t>(i)] = tail[static_cast<std::size_t>(i) + 1] + sm.mags(i);
  EnvelopeState st;
  st.s_values.resize(static_cast<std::size_t>(k));
  st.k_star = 1;
  bool negative_seen = false;
  for (Eigen::Index kk = 1; kk <= k; ++kk) {
    const Eigen::Index first = k - kk;  // 0-based index of x~_{K+1-k}
    const double s = tail[static_cast<std::size_t>(first)] - static_cast<double>(kk) * sm.mags(first);
    st.s_values[static_cast<std::size_t>(kk - 1)] = s;
    if (!negative_seen) {
      if (s >= 0.0) st.k_star = kk;
      else negative_seen = true;
    }
  }
  return st;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace detail {

inline double quad_env_card_scalar(double mu, double root_mu, double v) {
  const double a = std::abs(v);
  if (a == 0.0) return 0.0;
  if (a >= root_mu) return mu;
  const double gap = root_mu - a;
  return std::max(0.0, mu - gap * gap);
}

inline double quad_env_pk_value(const Vector& x, Eigen::Index k) {
  const Eigen::Index n = x.size();
  const std::size_t card = cardinality(x);
  if (static_cast<Eigen::Index>(card) <= k) return 0.0;
  if (k == 0) return kInfinity;
  const SortedMagnitudes sm = sort_magnitudes(x);
  const EnvelopeState st = envelope_state(sm, k);
  double sum = 0.0, sumsq = 0.0;
  for (Eigen::Index i = k - st.k_star; i < n; ++i) {
    sum += sm.mags(i);
    sumsq += sm.mags(i) * sm.mags(i);
  }
  return std::max(0.0, sum * sum / static_cast<double>(st.k_star) - sumsq);
}

}  // namespace detail

/// Penalty value; the indicator returns +infinity outside P_K.
inline double penalty_eval(const PenaltyKind& kind, const Vector& x) {
  validate(kind, x.size());
  return std::visit(
      [&x](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, L1>) {
          return p.lambda * x.lpNorm<1>();
        } else if constexpr (std::is_same_v<T, Card>) {
          return p.mu * static_cast<double>(cardinality(x));
        } else if constexpr (std::is_same_v<T, IndicatorPK>) {
          return static_cast<Eigen::Index>(cardinality(x)) <= p.k ? 0.0 : kInfinity;
        } else if constexpr (std::is_same_v<T, QuadEnvCard>) {
          const double r = std::sqrt(p.mu);
          double partial = 0.0;
          std::size_t flat = 0;
          for (Eigen::Index j = 0; j < x.size(); ++j) {
            if (std::abs(x(j)) >= r) ++flat;
            else partial += detail::quad_env_card_scalar(p.mu, r, x(j));
          }
          return p.mu * static_cast<double>(flat) + partial;
        } else {
          return detail::quad_env_pk_value(x, p.k);
        }
      },
      kind);
}

// ---------------------------------------------------------------------------
// Proximal operators

/// Weighted isotonic regression onto non-increasing sequences (pool adjacent
/// violators): argmin_u sum_i w_i (u_i - q_i)^2 s.t. u_1 >= u_2 >= ... .
/// Also returns the block id of every entry.
struct IsotonicFit {
  Vector values;
  std::vector<Eigen::Index> block;
  std::vector<Eigen::Index> block_size;
};

inline IsotonicFit isotonic_decreasing(const Vector& q, const Vector& w) {
  struct Block {
    double wsum, wqsum;
    Eigen::Index start, len;
    double mean() const { return wqsum / wsum; }
  };
  std::vector<Block> stack;
  stack.reserve(static_cast<std::size_t>(q.size()));
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    stack.push_back({w(i), w(i) * q(i), i, 1});
    while (stack.size() > 1 && stack[stack.size() - 2].mean() < stack.back().mean()) {
      Block top = stack.back();
      stack.pop_back();
      Block& prev = stack.back();
      prev.wsum += top.wsum;
      prev.wqsum += top.wqsum;
      prev.len += top.len;
    }
  }
  IsotonicFit fit;
  fit.values.resize(q.size());
  fit.block.resize(static_cast<std::size_t>(q.size()));
  for (std::size_t b = 0; b < stack.size(); ++b) {
    const Block& blk = stack[b];
    const double m = blk.len == 1 ? q(blk.start) : blk.mean();
    for (Eigen::Index i = blk.start; i < blk.start + blk.len; ++i) {
      fit.values(i) = m;
      fit.block[static_cast<std::size_t>(i)] = static_cast<Eigen::Index>(b);
    }
    fit.block_size.push_back(blk.len);
  }
  return fit;
}

namespace detail {

inline double sign(double v) { return v < 0.0 ? -1.0 : 1.0; }

// Prox of t*Q(iota_PK) for t < 1/2. With G convex and G*(u) = |u~_{1..K}|^2/2
// the problem reduces (Moreau) to a weighted isotonic regression on the sorted
// magnitudes r: targets r_j (j <= K, weight 1) and r_j/(2t) (j > K, weight 2t).
// The result is x~_j = (r_j - 2t u_j) / (1 - 2t).
inline Vector prox_quad_env_pk(const Vector& y, Eigen::Index k, double t) {
  const Eigen::Index n = y.size();
  Vector x = Vector::Zero(n);
  if (k == 0) return x;
  const SortedMagnitudes sm = sort_magnitudes(y);
  Vector q(n), w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i < k) {
      q(i) = sm.mags(i);
      w(i) = 1.0;
    } else {
      q(i) = sm.mags(i) / (2.0 * t);
      w(i) = 2.0 * t;
    }
  }
  const IsotonicFit fit = isotonic_decreasing(q, w);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index j = sm.perm[static_cast<std::size_t>(i)];
    const bool singleton = fit.block_size[static_cast<std::size_t>(fit.block[static_cast<std::size_t>(i)])] == 1;
    double mag;
    if (singleton) {
      mag = i < k ? sm.mags(i) : 0.0;
    } else {
      mag = std::max(0.0, (sm.mags(i) - 2.0 * t * fit.values(i)) / (1.0 - 2.0 * t));
    }
    x(j) = sign(y(j)) * mag;
  }
  return x;
}

}  // namespace detail

/// argmin_x t * penalty(x) + 0.5 ||x - y||^2.
///
/// Ties resolve toward zero: hard threshold keeps y_i only if y_i^2 / 2 > t mu,
/// the firm threshold zeroes |y_i| <= 2 t sqrt(mu), and the K-sparse projection
/// breaks magnitude ties by lower index. Envelope kinds require t < 1/2.
inline Vector penalty_prox(const PenaltyKind& kind, const Vector& y, double t) {
  validate(kind, y.size());
  if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("penalty_prox: t must be > 0");
  if (is_quad_env(kind) && !(t < 0.5))
    throw std::invalid_argument("penalty_prox: envelope prox requires t < 1/2");
  return std::visit(
      [&y, t](const auto& p) -> Vector {
        using T = std::decay_t<decltype(p)>;
        const Eigen::Index n = y.size();
        Vector x = Vector::Zero(n);
        if constexpr (std::is_same_v<T, L1>) {
          const double thr = t * p.lambda;
          for (Eigen::Index i = 0; i < n; ++i) {
            const double a = std::abs(y(i)) - thr;
            if (a > 0.0) x(i) = detail::sign(y(i)) * a;
          }
        } else if constexpr (std::is_same_v<T, Card>) {
          const double cost = t * p.mu;
          for (Eigen::Index i = 0; i < n; ++i)
            if (0.5 * y(i) * y(i) > cost) x(i) = y(i);
        } else if constexpr (std::is_same_v<T, IndicatorPK>) {
          const SortedMagnitudes sm = sort_magnitudes(y);
          for (Eigen::Index i = 0; i < p.k; ++i) {
            const Eigen::Index j = sm.perm[static_cast<std::size_t>(i)];
            x(j) = y(j);
          }
        } else if constexpr (std::is_same_v<T, QuadEnvCard>) {
          const double r = std::sqrt(p.mu);
          const double lo = 2.0 * t * r;
          for (Eigen::Index i = 0; i < n; ++i) {
            const double a = std::abs(y(i));
            if (a <= lo) continue;
            x(i) = a >= r ? y(i) : detail::sign(y(i)) * (a - lo) / (1.0 - 2.0 * t);
          }
        } else {
          x = detail::prox_quad_env_pk(y, p.k, t);
        }
        return x;
      },
      kind);
}

// ---------------------------------------------------------------------------
// Subdifferential of G

namespace detail {

inline double interval_distance(double v, double half_width) {
  const double a = std::abs(v);
  return a > half_width ? a - half_width : 0.0;
}

}  // namespace detail

/// Euclidean distance from z to dG(x). For the K-sparse envelope x must lie
/// in P_K, where dG(x) = { z : z = x on supp(x), |z_j| <= |x~_K| elsewhere }.
inline double subgradient_distance(const PenaltyKind& kind, const Vector& x, const Vector& z) {
  if (x.size() != z.size()) throw std::invalid_argument("subgradient_distance: size mismatch");
  validate(kind, x.size());
  if (const auto* p = std::get_if<QuadEnvCard>(&kind)) {
    const double r = std::sqrt(p->mu);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double a = std::abs(x(i));
      double d;
      if (a == 0.0) d = detail::interval_distance(z(i), r);
      else if (a >= r) d = z(i) - x(i);
      else d = z(i) - detail::sign(x(i)) * r;
      acc += d * d;
    }
    return std::sqrt(acc);
  }
  if (const auto* p = std::get_if<QuadEnvPK>(&kind)) {
    const auto card = static_cast<Eigen::Index>(cardinality(x));
    if (card > p->k)
      throw std::invalid_argument("subgradient_distance: x must lie in P_K");
    if (p->k == 0) return 0.0;
    // |x~_K| is zero when card(x) < K, which pins z to x everywhere.
    double floor_mag = kInfinity;
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (x(i) != 0.0) floor_mag = std::min(floor_mag, std::abs(x(i)));
    if (card < p->k) floor_mag = 0.0;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double d = x(i) != 0.0 ? z(i) - x(i) : detail::interval_distance(z(i), floor_mag);
      acc += d * d;
    }
    return std::sqrt(acc);
  }
  throw std::invalid_argument("subgradient_distance: only defined for envelope penalties");
}

}  // namespace qenv
