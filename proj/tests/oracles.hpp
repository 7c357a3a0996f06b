#pragma once

// Reference implementations used only by the tests. None of them call into
// the library's penalty, prox, enumeration or certificate code.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// mu - max(sqrt(mu) - |x|, 0)^2 for a scalar.
inline double card_envelope_scalar(double x, double mu) {
  const double gap = std::max(std::sqrt(mu) - std::abs(x), 0.0);
  return mu - gap * gap;
}

/// Convex envelope of mu 1[x != 0] + x^2 from the lower convex hull of
/// samples on [-r, r] (plus the point 0), minus x^2.
class HullCardEnvelope {
 public:
  HullCardEnvelope(double mu, double r, int samples) {
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i <= samples; ++i) {
      const double x = -r + 2.0 * r * i / samples;
      pts.emplace_back(x, (x != 0.0 ? mu : 0.0) + x * x);
    }
    pts.emplace_back(0.0, 0.0);
    std::sort(pts.begin(), pts.end());
    for (const auto& p : pts) {
      while (hull_.size() >= 2) {
        const auto& a = hull_[hull_.size() - 2];
        const auto& b = hull_.back();
        const double cross = (b.first - a.first) * (p.second - a.second) - (b.second - a.second) * (p.first - a.first);
        if (cross <= 0.0) hull_.pop_back();
        else break;
      }
      hull_.push_back(p);
    }
  }

  double operator()(double x) const {
    auto it = std::lower_bound(hull_.begin(), hull_.end(), std::make_pair(x, -kInf));
    if (it == hull_.begin()) return it->second - x * x;
    if (it == hull_.end()) throw std::out_of_range("hull envelope: outside sampled range");
    const auto& b = *it;
    const auto& a = *(it - 1);
    const double env = a.second + (b.second - a.second) * (x - a.first) / (b.first - a.first);
    return env - x * x;
  }

 private:
  std::vector<std::pair<double, double>> hull_;
};

/// Squared k-support norm by the two-sided selection rule for r, minus ||x||^2.
inline double pk_envelope_ksupport(const Vec& x, int k) {
  const int n = static_cast<int>(x.size());
  std::vector<double> w(x.data(), x.data() + n);
  for (auto& v : w) v = std::abs(v);
  std::sort(w.begin(), w.end(), std::greater<>());
  if (k >= n) return 0.0;
  // 1-based: w_0 = +inf.
  auto at = [&](int i) { return i == 0 ? kInf : w[static_cast<std::size_t>(i - 1)]; };
  double norm_sq = 0.0;
  for (double v : w) norm_sq += v * v;
  for (int r = 0; r <= k - 1; ++r) {
    double tail = 0.0;
    for (int i = k - r; i <= n; ++i) tail += at(i);
    const double avg = tail / (r + 1);
    const double tol = 1e-12 * (1.0 + tail);
    if (at(k - r - 1) > avg - tol && avg >= at(k - r) - tol) {
      double head = 0.0;
      for (int i = 1; i <= k - r - 1; ++i) head += at(i) * at(i);
      return std::max(0.0, head + tail * tail / (r + 1) - norm_sq);
    }
  }
  throw std::logic_error("k-support rule: no admissible r");
}

/// Maximizes a function over a box by repeated grid refinement around the
/// best point. Suitable for concave (or, negated, convex) objectives in at
/// most three variables.
inline Vec grid_refine(const std::function<double(const Vec&)>& f, Vec center, double half_width, int points,
                       double final_spacing, bool maximize) {
  const int n = static_cast<int>(center.size());
  Vec best = center;
  double best_val = maximize ? -kInf : kInf;
  for (;;) {
    const double h = 2.0 * half_width / (points - 1);
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    for (;;) {
      Vec p(n);
      for (int d = 0; d < n; ++d) p(d) = center(d) - half_width + h * idx[static_cast<std::size_t>(d)];
      const double v = f(p);
      if (maximize ? v > best_val : v < best_val) {
        best_val = v;
        best = p;
      }
      int d = 0;
      while (d < n && ++idx[static_cast<std::size_t>(d)] == points) idx[static_cast<std::size_t>(d++)] = 0;
      if (d == n) break;
    }
    if (h <= final_spacing) return best;
    center = best;
    half_width = 4.0 * h;
  }
}

/// 2 sup_y [<x, y> - 1/2 sum of the K largest y_j^2] - ||x||^2: the envelope
/// through its conjugate, maximized numerically.
inline double pk_envelope_fenchel(const Vec& x, int k) {
  auto conj = [&](const Vec& y) {
    std::vector<double> s(y.data(), y.data() + y.size());
    for (auto& v : s) v = v * v;
    std::sort(s.begin(), s.end(), std::greater<>());
    double top = 0.0;
    for (int i = 0; i < k && i < static_cast<int>(s.size()); ++i) top += s[static_cast<std::size_t>(i)];
    return x.dot(y) - 0.5 * top;
  };
  const double r = 2.0 * x.lpNorm<1>() + 1.0;
  const Vec y = grid_refine(conj, Vec::Zero(x.size()), r, 41, 1e-7, true);
  return 2.0 * conj(y) - x.squaredNorm();
}

/// Smallest singular value over all k-column submatrices by dense SVD.
inline double brute_beta(const Mat& a, int k) {
  const int n = static_cast<int>(a.cols());
  std::vector<bool> mask(static_cast<std::size_t>(n), false);
  std::fill(mask.begin(), mask.begin() + k, true);
  double best = kInf;
  do {
    Mat sub(a.rows(), k);
    int c = 0;
    for (int j = 0; j < n; ++j)
      if (mask[static_cast<std::size_t>(j)]) sub.col(c++) = a.col(j);
    Eigen::JacobiSVD<Mat> svd(sub);
    const double s = k > a.rows() ? 0.0 : svd.singularValues()(k - 1);
    best = std::min(best, s);
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return best;
}

/// Largest value of max(1 - s_min^2, s_max^2 - 1) over k-column submatrices.
inline double brute_delta(const Mat& a, int k) {
  const int n = static_cast<int>(a.cols());
  std::vector<bool> mask(static_cast<std::size_t>(n), false);
  std::fill(mask.begin(), mask.begin() + k, true);
  double best = 0.0;
  do {
    Mat sub(a.rows(), k);
    int c = 0;
    for (int j = 0; j < n; ++j)
      if (mask[static_cast<std::size_t>(j)]) sub.col(c++) = a.col(j);
    Eigen::JacobiSVD<Mat> svd(sub);
    const auto& sv = svd.singularValues();
    const double lo = k > a.rows() ? 0.0 : sv(k - 1);
    best = std::max({best, 1.0 - lo * lo, sv(0) * sv(0) - 1.0});
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return best;
}

struct SupportMinimum {
  double value = kInf;
  Vec x;
};

/// Least squares on one support through the normal equations.
inline Vec restricted_ls(const Mat& a, const Vec& b, const std::vector<int>& s) {
  Vec x = Vec::Zero(a.cols());
  if (s.empty()) return x;
  Mat as(a.rows(), static_cast<Eigen::Index>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) as.col(static_cast<Eigen::Index>(i)) = a.col(s[i]);
  const Vec xs = (as.transpose() * as).ldlt().solve(as.transpose() * b);
  for (std::size_t i = 0; i < s.size(); ++i) x(s[i]) = xs(static_cast<Eigen::Index>(i));
  return x;
}

/// Minimum of mu card(x) + ||Ax - b||^2 (mu > 0), or of ||Ax - b||^2 over
/// card(x) <= max_card (mu = 0), by enumerating every support.
inline SupportMinimum exhaustive_minimum(const Mat& a, const Vec& b, double mu, int max_card) {
  const int n = static_cast<int>(a.cols());
  SupportMinimum best;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    std::vector<int> s;
    for (int j = 0; j < n; ++j)
      if (mask >> j & 1u) s.push_back(j);
    if (static_cast<int>(s.size()) > max_card) continue;
    if (static_cast<int>(s.size()) > a.rows()) continue;
    const Vec x = restricted_ls(a, b, s);
    const double v = mu * static_cast<double>(s.size()) + (a * x - b).squaredNorm();
    if (v < best.value) {
      best.value = v;
      best.x = x;
    }
  }
  return best;
}

}  // namespace oracle
