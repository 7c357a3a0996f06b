#pragma once

// Monte-Carlo harness: noise sweeps over the five penalties, cardinality
// histograms, and tables of beta_k / delta_k for random matrices, with CSV,
// JSON and SVG renderings.

#include "qenv/certificates.hpp"
#include "qenv/core.hpp"
#include "qenv/fbs.hpp"
#include "qenv/io.hpp"
#include "qenv/penalties.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace qenv {

enum class Method { L1, Card, IndicatorPK, QuadEnvCard, QuadEnvPK };

inline const std::vector<Method>& all_methods() {
  static const std::vector<Method> m{Method::L1, Method::Card, Method::IndicatorPK,
                                     Method::QuadEnvCard, Method::QuadEnvPK};
  return m;
}

inline std::string method_name(Method m) {
  switch (m) {
    case Method::L1: return "l1";
    case Method::Card: return "card";
    case Method::IndicatorPK: return "pk";
    case Method::QuadEnvCard: return "qcard";
    case Method::QuadEnvPK: return "qpk";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  for (Method m : all_methods())
    if (method_name(m) == s) return m;
  throw std::invalid_argument("unknown method '" + s + "' (expected l1, card, pk, qcard or qpk)");
}

enum class StartKind { Zero, LeastSquares };

inline std::string start_name(StartKind s) { return s == StartKind::Zero ? "zero" : "ls"; }

/// lambda = (||eps|| / sqrt(n)) sqrt(2 log n) for the halved data term; the
/// objective here has no 1/2, so it is doubled.
inline double l1_lambda(double eps_norm, Eigen::Index n) {
  const double nd = static_cast<double>(n);
  return 2.0 * (eps_norm / std::sqrt(nd)) * std::sqrt(2.0 * std::log(nd));
}

inline PenaltyKind method_penalty(Method m, double mu, Eigen::Index k, double eps_norm, Eigen::Index n) {
  switch (m) {
    case Method::L1: return L1{l1_lambda(eps_norm, n)};
    case Method::Card: return Card{mu};
    case Method::IndicatorPK: return IndicatorPK{k};
    case Method::QuadEnvCard: return QuadEnvCard{mu};
    case Method::QuadEnvPK: return QuadEnvPK{k};
  }
  throw std::logic_error("method_penalty");
}

struct SweepConfig {
  Eigen::Index m = 100;
  Eigen::Index n = 200;
  Eigen::Index k = 10;
  std::vector<double> noise_grid{0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0};
  int trials = 50;
  std::vector<Method> methods = all_methods();
  double mu = 1.0;
  std::uint64_t seed = 1;
  StartKind start = StartKind::Zero;
  double x0_lo = 2.0;
  double x0_hi = 4.0;
  double x0_norm = 11.0;
  int max_iter = 1000;
  double stop_tol = 1e-10;
  unsigned threads = 0;
};

inline void validate(const SweepConfig& c) {
  if (c.m < 1 || c.n < 1) throw std::invalid_argument("sweep: m and n must be >= 1");
  if (c.k < 1 || c.k > c.n) throw std::invalid_argument("sweep: need 1 <= K <= n");
  if (c.trials < 1) throw std::invalid_argument("sweep: trials must be >= 1");
  if (c.noise_grid.empty()) throw std::invalid_argument("sweep: empty noise grid");
  for (std::size_t i = 0; i < c.noise_grid.size(); ++i) {
    if (!(c.noise_grid[i] >= 0.0)) throw std::invalid_argument("sweep: noise levels must be >= 0");
    if (i && !(c.noise_grid[i] > c.noise_grid[i - 1]))
      throw std::invalid_argument("sweep: noise grid must be strictly ascending");
  }
  if (c.methods.empty()) throw std::invalid_argument("sweep: no methods");
  if (!(c.mu > 0.0)) throw std::invalid_argument("sweep: mu must be > 0");
  if (c.max_iter < 1) throw std::invalid_argument("sweep: max_iter must be >= 1");
}

inline json to_json(const SweepConfig& c) {
  json methods = json::array();
  for (Method m : c.methods) methods.push_back(method_name(m));
  return {{"m", c.m},           {"n", c.n},
          {"K", c.k},           {"noise_grid", c.noise_grid},
          {"trials", c.trials}, {"methods", methods},
          {"mu", c.mu},         {"seed", c.seed},
          {"start", start_name(c.start)}, {"x0_range", {c.x0_lo, c.x0_hi}},
          {"x0_norm", c.x0_norm}, {"max_iter", c.max_iter},
          {"stop_tol", c.stop_tol}};
}

/// One solve of one method on one trial instance.
struct TrialRecord {
  Method method = Method::L1;
  std::size_t noise_index = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  double noise = 0.0;
  double snr = 0.0;
  double err_x0 = 0.0;
  double err_xs = 0.0;
  bool support_recovered = false;
  std::size_t card = 0;
  int iterations = 0;
  double max_trace_increase = 0.0;  // largest f_{k+1} - f_k over the trace
  double stationarity_residual = 0.0;
  bool stationarity_exact = true;
  double shadow_norm = 0.0;
  bool diverged = false;
  std::string error;
};

struct SweepCell {
  Method method = Method::L1;
  double noise = 0.0;
  double mean_snr = 0.0;
  double mean_err_x0 = 0.0;
  double mean_err_xs = 0.0;
  double recovery_rate = 0.0;
  double mean_card = 0.0;
  int completed = 0;
  int diverged = 0;
};

struct SweepReport {
  SweepConfig config;
  std::vector<SweepCell> cells;  // method-major, then noise
  std::vector<TrialRecord> records;
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;

  const SweepCell& cell(Method m, double noise) const {
    for (const auto& c : cells)
      if (c.method == m && c.noise == noise) return c;
    throw std::out_of_range("SweepReport::cell: no such cell");
  }
};

/// Seed of trial `trial` at noise index `noise_index`.
inline std::uint64_t trial_seed(std::uint64_t master, int trial, std::size_t noise_index) {
  return derive_seed(master, static_cast<std::uint64_t>(trial), noise_index);
}

struct TrialInstance {
  ProblemInstance inst;
  SupportSet support;
  SignalVector x_s;
};

inline TrialInstance make_trial_instance(const SweepConfig& c, double noise, std::uint64_t ts) {
  SensingMatrix a = generate_sensing_matrix(c.m, c.n, derive_seed(ts, 1));
  GroundTruth gt = generate_ground_truth(c.n, c.k, c.x0_lo, c.x0_hi, c.x0_norm, derive_seed(ts, 2));
  ProblemInstance inst = synthesize_measurements(a, gt.x0, noise, derive_seed(ts, 3));
  SignalVector xs = oracle_solution(inst.a, inst.b, gt.support);
  return {std::move(inst), std::move(gt.support), std::move(xs)};
}

namespace detail {

// Runs task(i) for i in [0, count) on a pool of workers claiming indices
// from a shared counter; results go to pre-assigned slots by the caller.
inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task) {
  unsigned t = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  t = static_cast<unsigned>(std::min<std::size_t>(t, count));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) task(i);
  };
  if (t <= 1) {
    worker();
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned i = 0; i < t; ++i) pool.emplace_back(worker);
}

inline double max_increase(const std::vector<double>& trace) {
  double m = 0.0;
  for (std::size_t i = 1; i < trace.size(); ++i) m = std::max(m, trace[i] - trace[i - 1]);
  return m;
}

}  // namespace detail

inline TrialRecord solve_trial(const SweepConfig& c, const TrialInstance& ti, Method method) {
  TrialRecord r;
  r.method = method;
  const ProblemInstance& inst = ti.inst;
  r.noise = inst.epsilon.norm();
  const double signal = (inst.a.entries() * inst.x0).norm();
  r.snr = r.noise > 0.0 ? signal / r.noise : kInfinity;
  SolverConfig sc;
  sc.max_iter = c.max_iter;
  sc.stop_tol = c.stop_tol;
  sc.start = c.start == StartKind::Zero ? StartPoint{StartZero{}} : StartPoint{StartLeastSquares{}};
  const PenaltyKind kind = method_penalty(method, c.mu, c.k, r.noise, c.n);
  try {
    const SolveResult res = fbs_solve(inst.a, inst.b, kind, sc);
    r.err_x0 = (res.x_final - inst.x0).norm();
    r.err_xs = (res.x_final - ti.x_s).norm();
    r.support_recovered = res.support == ti.support;
    r.card = res.support.size();
    r.iterations = res.iterations_used;
    r.max_trace_increase = detail::max_increase(res.objective_trace);
    r.stationarity_residual = res.stationarity_residual;
    r.stationarity_exact = res.stationarity_exact;
    r.shadow_norm = res.shadow_norm;
  } catch (const SolverDiverged& e) {
    r.diverged = true;
    r.error = e.what();
    r.iterations = static_cast<int>(e.trace().size()) - 1;
  }
  return r;
}

inline SweepReport run_noise_sweep(const SweepConfig& cfg) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  SweepReport rep;
  rep.config = cfg;
  const std::size_t nl = cfg.noise_grid.size();
  const std::size_t nm = cfg.methods.size();
  const std::size_t tasks = nl * static_cast<std::size_t>(cfg.trials);
  rep.records.resize(tasks * nm);

  detail::parallel_for(tasks, cfg.threads, [&](std::size_t task) {
    const std::size_t ni = task / static_cast<std::size_t>(cfg.trials);
    const int trial = static_cast<int>(task % static_cast<std::size_t>(cfg.trials));
    const std::uint64_t ts = trial_seed(cfg.seed, trial, ni);
    const TrialInstance ti = make_trial_instance(cfg, cfg.noise_grid[ni], ts);
    for (std::size_t mi = 0; mi < nm; ++mi) {
      TrialRecord r = solve_trial(cfg, ti, cfg.methods[mi]);
      r.noise_index = ni;
      r.trial = trial;
      r.seed = ts;
      r.noise = cfg.noise_grid[ni];
      rep.records[(mi * nl + ni) * static_cast<std::size_t>(cfg.trials) + static_cast<std::size_t>(trial)] =
          std::move(r);
    }
  });

  for (std::size_t mi = 0; mi < nm; ++mi) {
    for (std::size_t ni = 0; ni < nl; ++ni) {
      SweepCell cell;
      cell.method = cfg.methods[mi];
      cell.noise = cfg.noise_grid[ni];
      double snr_sum = 0.0;
      int snr_count = 0;
      for (int t = 0; t < cfg.trials; ++t) {
        const TrialRecord& r =
            rep.records[(mi * nl + ni) * static_cast<std::size_t>(cfg.trials) + static_cast<std::size_t>(t)];
        if (r.diverged) {
          ++cell.diverged;
          continue;
        }
        ++cell.completed;
        cell.mean_err_x0 += r.err_x0;
        cell.mean_err_xs += r.err_xs;
        cell.recovery_rate += r.support_recovered ? 1.0 : 0.0;
        cell.mean_card += static_cast<double>(r.card);
        if (std::isfinite(r.snr)) {
          snr_sum += r.snr;
          ++snr_count;
        }
      }
      if (cell.completed > 0) {
        const double c = cell.completed;
        cell.mean_err_x0 /= c;
        cell.mean_err_xs /= c;
        cell.recovery_rate /= c;
        cell.mean_card /= c;
      }
      cell.mean_snr = snr_count ? snr_sum / snr_count : kInfinity;
      if (cell.diverged > 0)
        rep.warnings.push_back(method_name(cell.method) + " at noise " + format_double(cell.noise) + ": " +
                               std::to_string(cell.diverged) + " diverged trials excluded from means");
      rep.cells.push_back(cell);
    }
  }

  for (Method m : cfg.methods) {
    for (std::size_t ni = 1; ni < nl; ++ni) {
      const double prev = rep.cell(m, cfg.noise_grid[ni - 1]).recovery_rate;
      const double cur = rep.cell(m, cfg.noise_grid[ni]).recovery_rate;
      if (cur > prev + 0.05)
        rep.warnings.push_back(method_name(m) + ": recovery rate rises from " + format_double(prev) + " to " +
                               format_double(cur) + " at noise " + format_double(cfg.noise_grid[ni]));
    }
  }
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

/// method, noise, mean_snr, mean_err_x0, mean_err_xs, recovery_rate,
/// mean_card, completed, diverged.
inline void write_sweep_csv(std::ostream& os, const SweepReport& rep) {
  CsvWriter w(os);
  w.row("method", "noise", "mean_snr", "mean_err_x0", "mean_err_xs", "recovery_rate", "mean_card",
        "completed", "diverged");
  for (const auto& c : rep.cells)
    w.row(method_name(c.method), c.noise, c.mean_snr, c.mean_err_x0, c.mean_err_xs, c.recovery_rate,
          c.mean_card, c.completed, c.diverged);
}

inline void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& records) {
  CsvWriter w(os);
  w.row("method", "noise", "trial", "seed", "snr", "err_x0", "err_xs", "support_recovered", "card",
        "iterations", "max_trace_increase", "stationarity_residual", "stationarity_exact", "shadow_norm",
        "diverged", "error");
  for (const auto& r : records)
    w.row(method_name(r.method), r.noise, r.trial, r.seed, r.snr, r.err_x0, r.err_xs,
          static_cast<int>(r.support_recovered), r.card, r.iterations, r.max_trace_increase,
          r.stationarity_residual, static_cast<int>(r.stationarity_exact), r.shadow_norm,
          static_cast<int>(r.diverged), r.error);
}

inline json report_header(const json& config) {
  return {{"config", config}, {"version", kVersion}};
}

inline json to_json(const SweepReport& rep) {
  json j = report_header(to_json(rep.config));
  j["wall_seconds"] = rep.wall_seconds;
  j["warnings"] = rep.warnings;
  j["noise_grid_note"] = "noise grid is a configurable choice; the default is 0, 0.5, ..., 5";
  json cells = json::array();
  for (const auto& c : rep.cells)
    cells.push_back({{"method", method_name(c.method)},
                     {"noise", c.noise},
                     {"mean_snr", json_number(c.mean_snr)},
                     {"mean_err_x0", c.mean_err_x0},
                     {"mean_err_xs", c.mean_err_xs},
                     {"recovery_rate", c.recovery_rate},
                     {"mean_card", c.mean_card},
                     {"completed", c.completed},
                     {"diverged", c.diverged}});
  j["cells"] = cells;
  json seeds = json::array();
  for (std::size_t ni = 0; ni < rep.config.noise_grid.size(); ++ni)
    for (int t = 0; t < rep.config.trials; ++t)
      seeds.push_back({{"noise_index", ni}, {"trial", t}, {"seed", trial_seed(rep.config.seed, t, ni)}});
  j["trial_seeds"] = seeds;
  json errors = json::array();
  for (const auto& r : rep.records)
    if (r.diverged)
      errors.push_back({{"method", method_name(r.method)}, {"noise", r.noise}, {"trial", r.trial}, {"error", r.error}});
  j["trial_errors"] = errors;
  return j;
}

// ---------------------------------------------------------------------------
// Cardinality histogram

struct HistReport {
  SweepConfig config;  // single noise level, single method
  std::vector<int> counts;  // counts[c] = trials with card(x') = c, c = 0..n
  std::vector<TrialRecord> records;
  double wall_seconds = 0.0;
};

/// QuadEnvCard from the least-squares start at one noise level.
inline HistReport run_cardinality_histogram(SweepConfig cfg, double noise) {
  cfg.noise_grid = {noise};
  cfg.methods = {Method::QuadEnvCard};
  cfg.start = StartKind::LeastSquares;
  const SweepReport sw = run_noise_sweep(cfg);
  HistReport h;
  h.config = cfg;
  h.counts.assign(static_cast<std::size_t>(cfg.n) + 1, 0);
  for (const auto& r : sw.records)
    if (!r.diverged) ++h.counts[r.card];
  h.records = sw.records;
  h.wall_seconds = sw.wall_seconds;
  return h;
}

inline void write_hist_csv(std::ostream& os, const HistReport& h) {
  CsvWriter w(os);
  w.row("card", "count");
  for (std::size_t c = 0; c < h.counts.size(); ++c) w.row(c, h.counts[c]);
}

inline json to_json(const HistReport& h) {
  json j = report_header(to_json(h.config));
  j["wall_seconds"] = h.wall_seconds;
  j["counts"] = h.counts;
  json per = json::array();
  int diverged = 0;
  for (const auto& r : h.records) {
    per.push_back({{"trial", r.trial}, {"seed", r.seed}, {"card", r.card}, {"diverged", r.diverged}});
    diverged += r.diverged ? 1 : 0;
  }
  j["trials"] = per;
  j["diverged"] = diverged;
  return j;
}

// ---------------------------------------------------------------------------
// Constants table

struct ConstantsEntry {
  std::uint64_t seed = 0;
  RlipTable table;
  std::map<int, CrtResult> crt;  // K -> verdict, for K with 4K <= n and delta_4K computed
  int computed_up_to = 0;        // largest enumerated k
};

struct ConstantsReport {
  Eigen::Index m = 0, n = 0;
  int k_max = 0;
  bool with_delta = false;
  std::uint64_t seed = 0;
  std::vector<ConstantsEntry> matrices;
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;
};

/// beta_k (and delta_k) for k = 1..k_max of one matrix; stops at the first k
/// whose enumeration exceeds the cap, filling beta_k = 0 for k > m where the
/// value needs no enumeration.
inline ConstantsEntry constants_for_matrix(const SensingMatrix& a, int k_max, bool with_delta,
                                           const EnumerationOptions& opts, std::vector<std::string>& warnings) {
  ConstantsEntry e;
  const int n = static_cast<int>(a.n());
  const int m = static_cast<int>(a.m());
  k_max = std::min(k_max, n);
  for (int k = 1; k <= k_max; ++k) {
    if (k > m && !with_delta) {
      e.table.betas[k] = 0.0;
      e.table.enumeration_counts[k] = 0;
      continue;
    }
    if (!opts.force && binomial(n, k) > opts.cap) {
      warnings.push_back("k = " + std::to_string(k) + ": C(" + std::to_string(n) + "," + std::to_string(k) +
                         ") = " + std::to_string(binomial(n, k)) + " exceeds the cap; enumerated k truncated");
      for (int kk = std::max(k, m + 1); kk <= k_max; ++kk) {
        e.table.betas[kk] = 0.0;
        e.table.enumeration_counts[kk] = 0;
      }
      break;
    }
    const SubsetExtremes x = subset_extremes(a, k, opts);
    const double lo = k > m ? 0.0 : x.sigma_min;
    e.table.betas[k] = lo;
    if (with_delta) e.table.deltas[k] = std::max(1.0 - lo * lo, x.sigma_max * x.sigma_max - 1.0);
    e.table.enumeration_counts[k] = x.scanned;
    e.computed_up_to = k;
  }
  if (with_delta) {
    for (int kk = 1; 4 * kk <= n; ++kk) {
      auto d3 = e.table.deltas.find(3 * kk);
      auto d4 = e.table.deltas.find(4 * kk);
      if (d3 == e.table.deltas.end() || d4 == e.table.deltas.end()) break;
      CrtResult c;
      c.delta_3k = d3->second;
      c.delta_4k = d4->second;
      c.lhs = c.delta_3k + 3.0 * c.delta_4k;
      c.holds = c.lhs < 2.0;
      e.crt[kk] = c;
    }
  }
  return e;
}

inline ConstantsReport run_constants_table(Eigen::Index m, Eigen::Index n, int k_max, int num_matrices,
                                           std::uint64_t seed, bool with_delta,
                                           const EnumerationOptions& opts = {}) {
  if (k_max < 1) throw std::invalid_argument("constants: kmax must be >= 1");
  if (num_matrices < 1) throw std::invalid_argument("constants: need at least one matrix");
  const auto t0 = std::chrono::steady_clock::now();
  ConstantsReport rep;
  rep.m = m;
  rep.n = n;
  rep.k_max = k_max;
  rep.with_delta = with_delta;
  rep.seed = seed;
  for (int i = 0; i < num_matrices; ++i) {
    const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(i));
    const SensingMatrix a = generate_sensing_matrix(m, n, s);
    std::vector<std::string> w;
    ConstantsEntry e = constants_for_matrix(a, k_max, with_delta, opts, w);
    e.seed = s;
    if (i == 0) rep.warnings = w;
    rep.matrices.push_back(std::move(e));
  }
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

/// matrix, seed, k, beta_k, inv_beta_k, delta_k, subsets_scanned.
inline void write_constants_csv(std::ostream& os, const ConstantsReport& rep) {
  CsvWriter w(os);
  w.row("matrix", "seed", "k", "beta_k", "inv_beta_k", "delta_k", "subsets_scanned");
  for (std::size_t i = 0; i < rep.matrices.size(); ++i) {
    const auto& e = rep.matrices[i];
    for (const auto& [k, beta] : e.table.betas) {
      w.field(i).field(e.seed).field(k).field(beta).field(beta > 0.0 ? 1.0 / beta : kInfinity);
      if (auto d = e.table.deltas.find(k); d != e.table.deltas.end())
        w.field(d->second);
      else
        w.field("");
      w.field(e.table.enumeration_counts.at(k));
      w.end_row();
    }
  }
}

inline json to_json(const ConstantsReport& rep) {
  json j = report_header({{"m", rep.m}, {"n", rep.n}, {"kmax", rep.k_max}, {"delta", rep.with_delta},
                          {"seed", rep.seed}, {"num_matrices", rep.matrices.size()}});
  j["wall_seconds"] = rep.wall_seconds;
  j["warnings"] = rep.warnings;
  json mats = json::array();
  for (const auto& e : rep.matrices) {
    json crt = json::object();
    for (const auto& [k, c] : e.crt)
      crt[std::to_string(k)] = {{"holds", c.holds}, {"lhs", c.lhs}, {"delta_3K", c.delta_3k}, {"delta_4K", c.delta_4k}};
    json betas = json::object();
    for (const auto& [k, b] : e.table.betas) betas[std::to_string(k)] = b;
    json deltas = json::object();
    for (const auto& [k, d] : e.table.deltas) deltas[std::to_string(k)] = d;
    mats.push_back({{"seed", e.seed}, {"betas", betas}, {"deltas", deltas}, {"crt", crt},
                    {"enumerated_up_to", e.computed_up_to}});
  }
  j["matrices"] = mats;
  return j;
}

// ---------------------------------------------------------------------------
// SVG

struct PlotSeries {
  std::string name;
  std::vector<double> xs, ys;
};

namespace detail {
inline const char* series_color(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  return colors[i % 6];
}

inline std::string xml_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '&': o += "&amp;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

inline std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}
}  // namespace detail

/// Line plot of the given series; non-finite points are skipped.
inline std::string render_line_plot_svg(const std::string& title, const std::string& xlabel,
                                        const std::string& ylabel, const std::vector<PlotSeries>& series) {
  const double w = 640, h = 420, left = 70, right = 150, top = 40, bottom = 55;
  double x0 = kInfinity, x1 = -kInfinity, y0 = 0.0, y1 = -kInfinity;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      if (!std::isfinite(s.xs[i]) || !std::isfinite(s.ys[i])) continue;
      x0 = std::min(x0, s.xs[i]);
      x1 = std::max(x1, s.xs[i]);
      y0 = std::min(y0, s.ys[i]);
      y1 = std::max(y1, s.ys[i]);
    }
  if (!(x1 > x0)) {
    x0 = std::isfinite(x0) ? x0 - 1 : 0;
    x1 = x0 + 2;
  }
  if (!(y1 > y0)) y1 = y0 + 1;
  const double pw = w - left - right, ph = h - top - bottom;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + ph - (y - y0) / (y1 - y0) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << left + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
    << detail::xml_escape(title) << "</text>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = x0 + (x1 - x0) * i / 5.0, yv = y0 + (y1 - y0) * i / 5.0;
    o << "<text x=\"" << px(xv) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\" font-size=\"11\">"
      << detail::fmt_tick(xv) << "</text>\n";
    o << "<text x=\"" << left - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
      << detail::fmt_tick(yv) << "</text>\n";
    o << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << py(yv) << "\" y2=\"" << py(yv)
      << "\" stroke=\"#ddd\"/>\n";
  }
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << h - 12 << "\" text-anchor=\"middle\" font-size=\"13\">"
    << detail::xml_escape(xlabel) << "</text>\n";
  o << "<text x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
    << top + ph / 2 << ")\">" << detail::xml_escape(ylabel) << "</text>\n";
  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    o << "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" << detail::series_color(si) << "\" points=\"";
    for (std::size_t i = 0; i < s.xs.size(); ++i)
      if (std::isfinite(s.xs[i]) && std::isfinite(s.ys[i])) o << px(s.xs[i]) << ',' << py(s.ys[i]) << ' ';
    o << "\"/>\n";
    const double ly = top + 16 + 18.0 * static_cast<double>(si);
    o << "<line x1=\"" << left + pw + 10 << "\" x2=\"" << left + pw + 30 << "\" y1=\"" << ly << "\" y2=\"" << ly
      << "\" stroke-width=\"2\" stroke=\"" << detail::series_color(si) << "\"/>\n";
    o << "<text x=\"" << left + pw + 36 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">" << detail::xml_escape(s.name)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

inline std::string render_histogram_svg(const std::string& title, const std::vector<int>& counts) {
  const double w = 640, h = 360, left = 50, top = 40, bottom = 45, right = 20;
  const double pw = w - left - right, ph = h - top - bottom;
  const int maxc = std::max(1, counts.empty() ? 1 : *std::max_element(counts.begin(), counts.end()));
  const double bw = pw / std::max<std::size_t>(1, counts.size());
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << detail::xml_escape(title)
    << "</text>\n";
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) continue;
    const double bh = ph * counts[c] / maxc;
    o << "<rect x=\"" << left + bw * static_cast<double>(c) << "\" y=\"" << top + ph - bh << "\" width=\""
      << std::max(1.0, bw - 1) << "\" height=\"" << bh << "\" fill=\"#1f77b4\"><title>card " << c << ": "
      << counts[c] << "</title></rect>\n";
  }
  o << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << top + ph << "\" y2=\"" << top + ph
    << "\" stroke=\"black\"/>\n";
  for (std::size_t c = 0; c < counts.size(); c += std::max<std::size_t>(1, counts.size() / 10))
    o << "<text x=\"" << left + bw * (static_cast<double>(c) + 0.5) << "\" y=\"" << top + ph + 16
      << "\" text-anchor=\"middle\" font-size=\"11\">" << c << "</text>\n";
  o << "<text x=\"" << left - 6 << "\" y=\"" << top + 4 << "\" text-anchor=\"end\" font-size=\"11\">" << maxc
    << "</text>\n";
  o << "<text x=\"" << w / 2 << "\" y=\"" << h - 8 << "\" text-anchor=\"middle\" font-size=\"13\">cardinality</text>\n";
  o << "</svg>\n";
  return o.str();
}

/// Error versus noise for each method, against x_S or x0.
inline std::string render_sweep_svg(const SweepReport& rep, bool oracle_error) {
  std::vector<PlotSeries> series;
  for (Method m : rep.config.methods) {
    PlotSeries s;
    s.name = method_name(m);
    for (const auto& c : rep.cells)
      if (c.method == m) {
        s.xs.push_back(c.noise);
        s.ys.push_back(oracle_error ? c.mean_err_xs : c.mean_err_x0);
      }
    series.push_back(std::move(s));
  }
  return render_line_plot_svg(oracle_error ? "mean ||x' - x_S|| vs noise" : "mean ||x' - x0|| vs noise",
                              "||eps||", oracle_error ? "||x' - x_S||" : "||x' - x0||", series);
}

}  // namespace qenv
