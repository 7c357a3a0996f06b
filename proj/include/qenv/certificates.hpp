#pragma once

// Restricted linear independence / isometry constants, K-feasibility, and
// checkable optimality certificates for stationary points of the envelope
// objectives.

#include "qenv/core.hpp"
#include "qenv/fbs.hpp"
#include "qenv/penalties.hpp"
#include "qenv/subsets.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace qenv {

// ---------------------------------------------------------------------------
// Singular value extremes over k-subsets

struct SubsetExtremes {
  double sigma_min = kInfinity;  // min over subsets of the smallest singular value
  double sigma_max = 0.0;        // max over subsets of the largest singular value
  std::uint64_t scanned = 0;
  std::vector<int> argmin;       // subset attaining sigma_min
};

/// Subsets with k <= this use eigenvalues of the Gram submatrix; larger ones a
/// full SVD of the m x k column submatrix.
inline constexpr int kGramSubsetLimit = 12;

namespace detail {

struct SigmaPair {
  double lo, hi;
};

inline SigmaPair subset_sigmas_gram(const Matrix& gram, const std::vector<int>& s) {
  const int k = static_cast<int>(s.size());
  if (k == 1) {
    const double v = std::sqrt(std::max(0.0, gram(s[0], s[0])));
    return {v, v};
  }
  Matrix sub(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) sub(i, j) = gram(s[static_cast<std::size_t>(i)], s[static_cast<std::size_t>(j)]);
  Eigen::SelfAdjointEigenSolver<Matrix> es(sub, Eigen::EigenvaluesOnly);
  return {std::sqrt(std::max(0.0, es.eigenvalues()(0))),
          std::sqrt(std::max(0.0, es.eigenvalues()(k - 1)))};
}

inline SigmaPair subset_sigmas_svd(const Matrix& a, const std::vector<int>& s) {
  const int k = static_cast<int>(s.size());
  Matrix sub(a.rows(), k);
  for (int i = 0; i < k; ++i) sub.col(i) = a.col(s[static_cast<std::size_t>(i)]);
  Eigen::JacobiSVD<Matrix> svd(sub);
  const Vector& sv = svd.singularValues();
  const double lo = k > a.rows() ? 0.0 : sv(sv.size() - 1);
  return {lo, sv(0)};
}

}  // namespace detail

enum class SigmaMethod { Auto, Gram, Svd };

inline SubsetExtremes subset_extremes(const SensingMatrix& a, int k,
                                      const EnumerationOptions& opts = {},
                                      SigmaMethod method = SigmaMethod::Auto) {
  const int n = static_cast<int>(a.n());
  if (k < 1 || k > n) throw std::invalid_argument("subset_extremes: need 1 <= k <= n");
  const bool use_gram =
      method == SigmaMethod::Gram || (method == SigmaMethod::Auto && k <= kGramSubsetLimit);
  const Matrix gram = use_gram ? Matrix(a.entries().transpose() * a.entries()) : Matrix();
  const Matrix& am = a.entries();
  return for_each_subset<SubsetExtremes>(
      n, k, opts, [] { return SubsetExtremes{}; },
      [&](SubsetExtremes& st, const std::vector<int>& s) {
        const detail::SigmaPair p =
            use_gram ? detail::subset_sigmas_gram(gram, s) : detail::subset_sigmas_svd(am, s);
        if (p.lo < st.sigma_min) {
          st.sigma_min = p.lo;
          st.argmin = s;
        }
        st.sigma_max = std::max(st.sigma_max, p.hi);
        ++st.scanned;
      },
      [](SubsetExtremes& acc, const SubsetExtremes& part) {
        if (part.sigma_min < acc.sigma_min) {
          acc.sigma_min = part.sigma_min;
          acc.argmin = part.argmin;
        }
        acc.sigma_max = std::max(acc.sigma_max, part.sigma_max);
        acc.scanned += part.scanned;
      });
}

/// beta_k = min over card(x) <= k of ||A x|| / ||x||: the smallest singular
/// value over all k-column submatrices. Zero without enumeration when k > m.
inline double rlip_beta(const SensingMatrix& a, int k, const EnumerationOptions& opts = {}) {
  if (k < 1 || k > a.n()) throw std::invalid_argument("rlip_beta: need 1 <= k <= n");
  if (k > a.m()) return 0.0;
  return subset_extremes(a, k, opts).sigma_min;
}

/// delta_k = max over k-subsets of max(1 - sigma_min^2, sigma_max^2 - 1).
inline double rip_delta(const SensingMatrix& a, int k, const EnumerationOptions& opts = {}) {
  if (k < 1 || k > a.n()) throw std::invalid_argument("rip_delta: need 1 <= k <= n");
  const SubsetExtremes e = subset_extremes(a, k, opts);
  const double lo = k > a.m() ? 0.0 : e.sigma_min;
  return std::max(1.0 - lo * lo, e.sigma_max * e.sigma_max - 1.0);
}

struct RlipTable {
  std::map<int, double> betas;
  std::map<int, double> deltas;
  std::map<int, std::uint64_t> enumeration_counts;
};

/// beta_k (and optionally delta_k) for k = 1..k_max from one pass per k.
inline RlipTable rlip_table(const SensingMatrix& a, int k_max, bool with_delta,
                            const EnumerationOptions& opts = {}) {
  RlipTable t;
  for (int k = 1; k <= std::min<int>(k_max, static_cast<int>(a.n())); ++k) {
    if (k > a.m() && !with_delta) {
      t.betas[k] = 0.0;
      t.enumeration_counts[k] = 0;
      continue;
    }
    const SubsetExtremes e = subset_extremes(a, k, opts);
    const double lo = k > a.m() ? 0.0 : e.sigma_min;
    t.betas[k] = lo;
    if (with_delta) t.deltas[k] = std::max(1.0 - lo * lo, e.sigma_max * e.sigma_max - 1.0);
    t.enumeration_counts[k] = e.scanned;
  }
  return t;
}

struct CrtResult {
  bool holds = false;
  double lhs = 0.0;  // delta_3K + 3 delta_4K
  double delta_3k = 0.0;
  double delta_4k = 0.0;
};

/// The classical delta_3K + 3 delta_4K < 2 requirement.
inline CrtResult crt_condition(const SensingMatrix& a, int k, const EnumerationOptions& opts = {}) {
  if (k < 1 || 4 * k > a.n()) throw std::invalid_argument("crt_condition: need 1 <= K and 4K <= n");
  CrtResult r;
  r.delta_3k = rip_delta(a, 3 * k, opts);
  r.delta_4k = rip_delta(a, 4 * k, opts);
  r.lhs = r.delta_3k + 3.0 * r.delta_4k;
  r.holds = r.lhs < 2.0;
  return r;
}

// ---------------------------------------------------------------------------
// Stationarity

struct StationarityCheck {
  bool stationary = false;
  double residual = 0.0;
  double threshold = 0.0;
  SignalVector z;
};

/// x is stationary iff its shadow point z lies in dG(x).
inline StationarityCheck is_stationary(const SensingMatrix& a, const SignalVector& b,
                                       const SignalVector& x, const PenaltyKind& kind,
                                       double tol = 1e-6) {
  if (!is_quad_env(kind))
    throw std::invalid_argument("is_stationary: only defined for envelope penalties");
  StationarityCheck c;
  c.z = shadow_point(a, b, x);
  c.residual = subgradient_distance(kind, x, c.z);
  c.threshold = tol * (1.0 + c.z.norm());
  c.stationary = c.residual <= c.threshold;
  return c;
}

// ---------------------------------------------------------------------------
// K-feasibility

enum class Feasibility { StrictlyFeasible, Feasible, Infeasible, Unknown };

inline const char* to_string(Feasibility f) {
  switch (f) {
    case Feasibility::StrictlyFeasible: return "StrictlyFeasible";
    case Feasibility::Feasible: return "Feasible";
    case Feasibility::Infeasible: return "Infeasible";
    case Feasibility::Unknown: return "Unknown";
  }
  return "?";
}

struct FeasibilityVerdict {
  Feasibility status = Feasibility::Unknown;
  std::string witness;
  std::vector<int> witness_subset;  // set when Infeasible
};

enum class FeasibilityMode { SufficientOnly, Exact };

inline constexpr int kExactFeasibilityMaxColumns = 32;
inline constexpr double kFeasibilityTol = 1e-12;

namespace detail {

// Searches for a clique of `target` vertices; adjacency as bitmasks.
inline bool find_clique(const std::vector<std::uint64_t>& adj, std::uint64_t cand, int target,
                        std::vector<int>& chosen) {
  if (static_cast<int>(chosen.size()) >= target) return true;
  while (cand) {
    if (static_cast<int>(chosen.size()) + std::popcount(cand) < target) return false;
    const int v = std::countr_zero(cand);
    cand &= cand - 1;
    chosen.push_back(v);
    if (find_clique(adj, cand & adj[static_cast<std::size_t>(v)], target, chosen)) return true;
    chosen.pop_back();
  }
  return static_cast<int>(chosen.size()) >= target;
}

// Clique of size target in the graph with an edge wherever edge(i, j) holds,
// after iteratively discarding vertices of too small degree.
template <class Edge>
std::optional<std::vector<int>> clique_of_size(int n, int target, Edge edge) {
  if (target <= 0) return std::vector<int>{};
  std::vector<std::uint64_t> adj(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && edge(i, j)) adj[static_cast<std::size_t>(i)] |= std::uint64_t{1} << j;
  std::uint64_t alive = n == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);
  for (bool changed = true; changed;) {
    changed = false;
    for (int v = 0; v < n; ++v) {
      if (!(alive >> v & 1)) continue;
      if (std::popcount(adj[static_cast<std::size_t>(v)] & alive) < target - 1) {
        alive &= ~(std::uint64_t{1} << v);
        changed = true;
      }
    }
  }
  std::vector<int> chosen;
  if (find_clique(adj, alive, target, chosen)) return chosen;
  return std::nullopt;
}

inline std::string subset_string(const std::vector<int>& s) {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << '}';
  return os.str();
}

}  // namespace detail

/// A is K-feasible if ||A||_inf,col <= 1 and every (n-K)-column subset contains
/// a pair with ||a_i - a_j||^2 <= 2 (strictly: < 2).
inline FeasibilityVerdict check_k_feasibility(const SensingMatrix& a, int k,
                                              FeasibilityMode mode = FeasibilityMode::SufficientOnly) {
  const int n = static_cast<int>(a.n());
  const int m = static_cast<int>(a.m());
  if (k < 0 || k > n) throw std::invalid_argument("check_k_feasibility: need 0 <= K <= n");
  FeasibilityVerdict v;
  const Matrix& am = a.entries();
  const Vector norms = am.colwise().norm().transpose();
  for (int i = 0; i < n; ++i) {
    if (norms(i) > 1.0 + kFeasibilityTol) {
      v.status = Feasibility::Infeasible;
      v.witness_subset = {i};
      v.witness = "column " + std::to_string(i) + " has norm above 1";
      return v;
    }
  }
  const Matrix gram = am.transpose() * am;

  if (mode == FeasibilityMode::SufficientOnly) {
    bool feasible = false;
    if (n >= m + k + 2) {
      feasible = true;
      v.status = Feasibility::Feasible;
      v.witness = "n >= m + K + 2";
      bool orthogonal_pair = false;
      for (int i = 0; i < n && !orthogonal_pair; ++i)
        for (int j = 0; j < i; ++j)
          if (std::abs(gram(i, j)) <= kFeasibilityTol) {
            orthogonal_pair = true;
            break;
          }
      if (!orthogonal_pair) {
        v.status = Feasibility::StrictlyFeasible;
        v.witness = "n >= m + K + 2 and no orthogonal column pair";
        return v;
      }
      if (norms.maxCoeff() < 1.0 - kFeasibilityTol) {
        v.status = Feasibility::StrictlyFeasible;
        v.witness = "n >= m + K + 2 and all column norms below 1";
        return v;
      }
    }
    std::uint64_t positive = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < i; ++j)
        if (gram(i, j) > kFeasibilityTol) ++positive;
    if (positive >= static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(k)) {
      v.status = Feasibility::StrictlyFeasible;
      v.witness = std::to_string(positive) + " positive inner products >= nK = " +
                  std::to_string(static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(k));
      return v;
    }
    if (!feasible) {
      v.status = Feasibility::Unknown;
      v.witness = "no sufficient condition applies";
    }
    return v;
  }

  if (n > kExactFeasibilityMaxColumns) {
    v.status = Feasibility::Unknown;
    v.witness = "exact search limited to n <= " + std::to_string(kExactFeasibilityMaxColumns);
    return v;
  }
  auto dist2 = [&](int i, int j) { return gram(i, i) + gram(j, j) - 2.0 * gram(i, j); };
  const int target = n - k;
  // A subset whose pairs all exceed 2 breaks feasibility.
  if (auto c = detail::clique_of_size(n, target, [&](int i, int j) { return dist2(i, j) > 2.0 + kFeasibilityTol; })) {
    v.status = Feasibility::Infeasible;
    v.witness_subset = *c;
    v.witness = "every pair in " + detail::subset_string(*c) + " has ||a_i - a_j||^2 > 2";
    return v;
  }
  if (auto c = detail::clique_of_size(n, target, [&](int i, int j) { return dist2(i, j) >= 2.0 - kFeasibilityTol; })) {
    v.status = Feasibility::Feasible;
    v.witness = "subset " + detail::subset_string(*c) + " has no pair with ||a_i - a_j||^2 < 2";
    return v;
  }
  v.status = Feasibility::StrictlyFeasible;
  v.witness = "exhaustive clique search: every (n-K)-subset has a pair with ||a_i - a_j||^2 < 2";
  return v;
}

// ---------------------------------------------------------------------------
// Certificates

enum class Verdict { UniqueGlobalMin, OracleGuaranteed, Inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::UniqueGlobalMin: return "UniqueGlobalMin";
    case Verdict::OracleGuaranteed: return "OracleGuaranteed";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

struct Hypothesis {
  std::string name;
  double lhs = 0.0;
  std::string relation;  // "<", "<=", ">", "outside", ...
  double rhs = 0.0;
  bool pass = false;
  std::string note;
};

struct CertificateReport {
  std::string theorem;
  std::vector<Hypothesis> hypotheses;
  Verdict verdict = Verdict::Inconclusive;
  std::string reason;
  std::vector<std::string> claims;
  SignalVector z;
  std::map<int, double> betas;
  std::size_t card = 0;
  double residual_sq = 0.0;
  std::map<std::string, double> bounds;

  bool all_pass() const {
    return std::all_of(hypotheses.begin(), hypotheses.end(), [](const Hypothesis& h) { return h.pass; });
  }
};

/// Provides beta_k; defaults to exhaustive enumeration.
using BetaProvider = std::function<double(int k)>;

inline BetaProvider enumerate_betas(const SensingMatrix& a, EnumerationOptions opts = {}) {
  return [&a, opts](int k) { return rlip_beta(a, k, opts); };
}

struct CertifyOptions {
  double stationarity_tol = 1e-6;
  EnumerationOptions enumeration;
  BetaProvider beta;  // empty: enumerate
};

/// Sparse stationary point of Q(mu card) + ||Ax - b||^2: checks the column
/// bound, that no |z_i| falls in [beta_N^2 sqrt(mu), sqrt(mu) / beta_N^2],
/// and 2 mu card(x') + ||Ax' - b||^2 < mu N + mu.
inline CertificateReport certify_card_minimizer(const SensingMatrix& a, const SignalVector& b,
                                                double mu, const SignalVector& x_prime, int gap_n,
                                                const CertifyOptions& opts = {}) {
  if (!(mu > 0.0)) throw std::invalid_argument("certify_card_minimizer: mu must be > 0");
  if (gap_n < 1 || gap_n > a.n()) throw std::invalid_argument("certify_card_minimizer: need 1 <= N <= n");
  CertificateReport rep;
  rep.theorem = "card";
  const PenaltyKind kind = QuadEnvCard{mu};
  const StationarityCheck st = is_stationary(a, b, x_prime, kind, opts.stationarity_tol);
  rep.z = st.z;
  rep.card = cardinality(x_prime);
  rep.residual_sq = (a.entries() * x_prime - b).squaredNorm();
  rep.hypotheses.push_back({"stationary", st.residual, "<=", st.threshold, st.stationary,
                            "dist(z, dG(x')) recomputed"});
  if (!st.stationary) {
    rep.reason = "x' is not a stationary point";
    return rep;
  }

  const double beta = opts.beta ? opts.beta(gap_n) : rlip_beta(a, gap_n, opts.enumeration);
  rep.betas[gap_n] = beta;
  const double root_mu = std::sqrt(mu);

  rep.hypotheses.push_back({"column_norm_bound", a.max_col_norm(), "<=", 1.0,
                            a.max_col_norm() <= 1.0 + kFeasibilityTol, ""});

  if (beta == 0.0) {
    rep.hypotheses.push_back({"beta_N_positive", beta, ">", 0.0, false, ""});
    rep.reason = "beta_N = 0";
    return rep;
  }
  const double lo = beta * beta * root_mu;
  const double hi = root_mu / (beta * beta);
  rep.bounds["interval_lo"] = lo;
  rep.bounds["interval_hi"] = hi;
  Hypothesis gap{"shadow_outside_interval", 0.0, "outside", 0.0, true, ""};
  if (beta > 1.0) {
    gap.note = "beta_N > 1: automatically satisfied";
  } else {
    // lhs: entries inside the closed interval; rhs: allowed count.
    double margin = kInfinity;
    int inside = 0;
    for (Eigen::Index i = 0; i < st.z.size(); ++i) {
      const double az = std::abs(st.z(i));
      margin = std::min(margin, std::max(lo - az, az - hi));
      if (az >= lo && az <= hi) ++inside;
    }
    gap.lhs = inside;
    gap.rhs = 0.0;
    gap.pass = inside == 0;
    rep.bounds["interval_margin"] = margin;
    if (beta == 1.0) gap.note = "beta_N = 1: boundary case, checked as for beta_N < 1";
  }
  rep.hypotheses.push_back(gap);

  const double lhs_c = 2.0 * mu * static_cast<double>(rep.card) + rep.residual_sq;
  const double rhs_c = mu * gap_n + mu;
  rep.hypotheses.push_back({"energy_gap", lhs_c, "<", rhs_c, lhs_c < rhs_c,
                            "2 mu card(x') + ||Ax'-b||^2 < mu N + mu"});

  if (rep.all_pass()) {
    rep.verdict = Verdict::UniqueGlobalMin;
    rep.claims.push_back("x' is the unique global minimizer of mu card(x) + ||Ax-b||^2 and of its envelope");
    rep.claims.push_back("every other stationary point x'' has card(x'') > " +
                         std::to_string(gap_n - static_cast<int>(rep.card)));
  } else {
    rep.reason = "a hypothesis failed";
  }
  return rep;
}

/// Stationary point in P_K of Q(iota_PK) + ||Ax - b||^2: checks K-feasibility
/// and |z~_{K+1}| < (2 beta_2K^2 - 1) |z~_K|.
inline CertificateReport certify_pk_minimizer(const SensingMatrix& a, const SignalVector& b, int k,
                                              const SignalVector& x_prime,
                                              const CertifyOptions& opts = {}) {
  if (k < 1 || k > a.n()) throw std::invalid_argument("certify_pk_minimizer: need 1 <= K <= n");
  CertificateReport rep;
  rep.theorem = "pk";
  rep.card = cardinality(x_prime);
  rep.residual_sq = (a.entries() * x_prime - b).squaredNorm();
  const bool in_pk = static_cast<int>(rep.card) <= k;
  rep.hypotheses.push_back({"in_P_K", static_cast<double>(rep.card), "<=", static_cast<double>(k), in_pk, ""});
  if (!in_pk) {
    rep.reason = "card(x') > K";
    rep.z = shadow_point(a, b, x_prime);
    return rep;
  }
  const StationarityCheck st = is_stationary(a, b, x_prime, QuadEnvPK{k}, opts.stationarity_tol);
  rep.z = st.z;
  rep.hypotheses.push_back({"stationary", st.residual, "<=", st.threshold, st.stationary,
                            "dist(z, dG(x')) recomputed"});
  if (!st.stationary) {
    rep.reason = "x' is not a stationary point";
    return rep;
  }

  FeasibilityVerdict fv = check_k_feasibility(a, k, FeasibilityMode::SufficientOnly);
  if (fv.status == Feasibility::Unknown && a.n() <= kExactFeasibilityMaxColumns)
    fv = check_k_feasibility(a, k, FeasibilityMode::Exact);
  const bool feasible = fv.status == Feasibility::Feasible || fv.status == Feasibility::StrictlyFeasible;
  rep.hypotheses.push_back({"K_feasible", feasible ? 1.0 : 0.0, "==", 1.0, feasible,
                            std::string(to_string(fv.status)) + ": " + fv.witness});

  const int k2 = std::min<int>(2 * k, static_cast<int>(a.n()));
  const double beta = opts.beta ? opts.beta(k2) : rlip_beta(a, k2, opts.enumeration);
  rep.betas[k2] = beta;
  const SortedMagnitudes sz = sort_magnitudes(st.z);
  const double zk = sz.mags(k - 1);
  const double zk1 = k < a.n() ? sz.mags(k) : 0.0;
  const double factor = 2.0 * beta * beta - 1.0;
  rep.bounds["z_sorted_K"] = zk;
  rep.bounds["z_sorted_K_plus_1"] = zk1;
  rep.bounds["2beta2K^2-1"] = factor;
  Hypothesis sep{"shadow_separation", zk1, "<", factor * zk, zk1 < factor * zk, ""};
  if (factor <= 0.0) sep.note = "beta_2K <= 1/sqrt(2): right side non-positive";
  rep.hypotheses.push_back(sep);

  if (rep.all_pass()) {
    rep.verdict = Verdict::UniqueGlobalMin;
    rep.claims.push_back("x' is the unique global minimizer of the K-sparse problem and of its envelope");
    if (fv.status == Feasibility::StrictlyFeasible)
      rep.claims.push_back("the envelope objective has no other local minimizers");
  } else {
    rep.reason = "a hypothesis failed";
  }
  return rep;
}

struct OracleGuarantee {
  bool holds = false;
  std::map<std::string, double> margins;  // positive when the inequality holds
  double error_bound = kInfinity;         // ||x_S - x0|| <= ||eps|| / beta_K
  std::string reason;
};

namespace detail {
inline double min_support_magnitude(const SignalVector& x0) {
  double m = kInfinity;
  for (Eigen::Index j = 0; j < x0.size(); ++j)
    if (x0(j) != 0.0) m = std::min(m, std::abs(x0(j)));
  return m;
}
}  // namespace detail

/// ||eps|| < beta_N^2 sqrt(mu) and min_S |x0_j| > (1/beta_N^2 + 1) sqrt(mu).
inline OracleGuarantee guarantee_oracle_card(double beta_n, double beta_k, const SignalVector& x0,
                                             double eps_norm, double mu, int gap_n) {
  if (gap_n < 2 * static_cast<int>(cardinality(x0)))
    throw std::invalid_argument("guarantee_oracle_card: need N >= 2 card(x0)");
  OracleGuarantee g;
  if (!(beta_n > 0.0)) {
    g.reason = "beta_N = 0";
    return g;
  }
  const double root_mu = std::sqrt(mu);
  const double b2 = beta_n * beta_n;
  const double noise_rhs = b2 * root_mu;
  const double mag_rhs = (1.0 / b2 + 1.0) * root_mu;
  const double min_mag = detail::min_support_magnitude(x0);
  g.margins["noise"] = noise_rhs - eps_norm;
  g.margins["magnitude"] = min_mag - mag_rhs;
  g.margins["noise_bound"] = noise_rhs;
  g.margins["magnitude_bound"] = mag_rhs;
  g.holds = eps_norm < noise_rhs && min_mag > mag_rhs;
  if (beta_k > 0.0) g.error_bound = eps_norm / beta_k;
  if (!g.holds) g.reason = eps_norm < noise_rhs ? "support magnitudes too small" : "noise too large";
  return g;
}

/// beta_2K > 1/sqrt(2) and min_S |x0_j| > (1/(2 beta_2K^2 - 1) + 1/beta_K) ||eps||.
inline OracleGuarantee guarantee_oracle_pk(double beta_k, double beta_2k, const SignalVector& x0,
                                           double eps_norm) {
  OracleGuarantee g;
  const double factor = 2.0 * beta_2k * beta_2k - 1.0;
  g.margins["beta_2K"] = beta_2k - 1.0 / std::sqrt(2.0);
  if (!(factor > 0.0)) {
    g.reason = "beta_2K <= 1/sqrt(2)";
    return g;
  }
  if (!(beta_k > 0.0)) {
    g.reason = "beta_K = 0";
    return g;
  }
  const double mag_rhs = (1.0 / factor + 1.0 / beta_k) * eps_norm;
  const double min_mag = detail::min_support_magnitude(x0);
  g.margins["magnitude"] = min_mag - mag_rhs;
  g.margins["magnitude_bound"] = mag_rhs;
  g.holds = min_mag > mag_rhs;
  g.error_bound = eps_norm / beta_k;
  if (!g.holds) g.reason = "support magnitudes too small";
  return g;
}

}  // namespace qenv
