// qenv: generate instances, run the solvers, compute constants and
// certificates, and reproduce the noise sweep / histogram experiments.

#include "qenv/qenv.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace qenv;

namespace {

enum ExitCode { kOk = 0, kInvalidConfig = 2, kCapExceeded = 3, kDiverged = 4 };

struct EnumFlags {
  std::uint64_t cap = 2'000'000;
  bool force = false;
  unsigned threads = 0;
  bool progress = false;

  void add(CLI::App* app) {
    app->add_option("--cap", cap, "subset enumeration cap");
    app->add_flag("--force", force, "enumerate beyond the cap");
    app->add_option("--threads", threads, "worker threads (0: all cores)");
    app->add_flag("--progress", progress, "report enumeration progress on stderr");
  }

  EnumerationOptions options() const {
    EnumerationOptions o;
    o.cap = cap;
    o.force = force;
    o.threads = threads;
    if (progress)
      o.progress = [last = std::uint64_t{0}](std::uint64_t done, std::uint64_t total) mutable {
        if (done == total || done - last >= total / 20) {
          std::cerr << "  enumerated " << done << " / " << total << "\n";
          last = done;
        }
      };
    return o;
  }
};

StartKind parse_start(const std::string& s) {
  if (s == "zero") return StartKind::Zero;
  if (s == "ls") return StartKind::LeastSquares;
  throw std::invalid_argument("unknown start '" + s + "' (expected zero or ls)");
}

std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(detail::parse_double(tok, "--noise-grid"));
  return out;
}

// ---------------------------------------------------------------------------

struct GenArgs {
  int m = 100, n = 200, k = 10;
  double noise = 1.0, lo = 2.0, hi = 4.0, norm = 11.0;
  std::uint64_t seed = 1;
  std::string out = "instance";
};

int run_gen(const GenArgs& g) {
  const SensingMatrix a = generate_sensing_matrix(g.m, g.n, derive_seed(g.seed, 1));
  const GroundTruth gt = generate_ground_truth(g.n, g.k, g.lo, g.hi, g.norm, derive_seed(g.seed, 2));
  const ProblemInstance inst = synthesize_measurements(a, gt.x0, g.noise, derive_seed(g.seed, 3));
  const fs::path dir(g.out);
  save_matrix(dir / "A.csv", a.entries());
  save_vector(dir / "x0.csv", inst.x0);
  save_vector(dir / "eps.csv", inst.epsilon);
  save_vector(dir / "b.csv", inst.b);
  json support = json::array();
  for (auto j : gt.support) support.push_back(j);
  save_json(dir / "instance.json",
            {{"m", g.m}, {"n", g.n}, {"K", g.k}, {"seed", g.seed}, {"noise", g.noise},
             {"generator", "normalized-gaussian columns; x0 magnitudes uniform on [lo, hi], random signs, rescaled"},
             {"x0_range", {g.lo, g.hi}}, {"x0_norm", g.norm}, {"support", support},
             {"op_norm", a.op_norm()}, {"version", kVersion}});
  std::cout << "wrote " << (dir / "A.csv").string() << ", x0.csv, eps.csv, b.csv, instance.json\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct SolveArgs {
  std::string a, b, method = "qcard", start = "zero", start_file, out;
  double mu = 1.0, lambda = 0.0, tol = 1e-10;
  int k = 10, max_iter = 1000;
  std::optional<double> step;
};

PenaltyKind penalty_from(const std::string& method, double mu, int k, double lambda) {
  switch (parse_method(method)) {
    case Method::L1: return L1{lambda};
    case Method::Card: return Card{mu};
    case Method::IndicatorPK: return IndicatorPK{k};
    case Method::QuadEnvCard: return QuadEnvCard{mu};
    case Method::QuadEnvPK: return QuadEnvPK{k};
  }
  throw std::logic_error("penalty_from");
}

int run_solve(const SolveArgs& s) {
  const SensingMatrix a(load_matrix(s.a));
  const Vector b = load_vector(s.b);
  const PenaltyKind kind = penalty_from(s.method, s.mu, s.k, s.lambda);
  SolverConfig cfg;
  cfg.step = s.step;
  cfg.max_iter = s.max_iter;
  cfg.stop_tol = s.tol;
  if (s.start == "file") {
    if (s.start_file.empty()) throw std::invalid_argument("--start file needs --start-file");
    cfg.start = StartGiven{load_vector(s.start_file)};
  } else {
    cfg.start = parse_start(s.start) == StartKind::Zero ? StartPoint{StartZero{}} : StartPoint{StartLeastSquares{}};
  }
  const SolveResult r = fbs_solve(a, b, kind, cfg);
  if (!s.out.empty()) save_vector(s.out, r.x_final);
  json support = json::array();
  for (auto j : r.support) support.push_back(j);
  const json j = {{"method", penalty_name(kind)},
                  {"objective", json_number(r.objective_trace.back())},
                  {"objective_initial", json_number(r.objective_trace.front())},
                  {"iterations", r.iterations_used},
                  {"converged", r.converged},
                  {"step", r.step},
                  {"stationarity_residual", r.stationarity_residual},
                  {"stationarity_exact", r.stationarity_exact},
                  {"shadow_norm", r.shadow_norm},
                  {"card", r.support.size()},
                  {"support", support}};
  std::cout << j.dump(2) << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct CertifyArgs {
  std::string a, b, x, x0, theorem = "card", beta_cache, out;
  double mu = 1.0;
  std::optional<double> eps_norm;
  int k = 0, n_gap = 0;
  EnumFlags en;
};

int run_certify(const CertifyArgs& c) {
  const SensingMatrix a(load_matrix(c.a));
  std::optional<BetaCache> cache;
  if (!c.beta_cache.empty()) cache.emplace(c.beta_cache);
  const EnumerationOptions eo = c.en.options();
  auto beta = [&](int k) {
    if (cache) return cache->provider(a, eo)(k);
    return rlip_beta(a, k, eo);
  };
  json out;
  if (c.theorem == "card" || c.theorem == "pk") {
    if (c.b.empty() || c.x.empty()) throw std::invalid_argument("certify " + c.theorem + " needs --b and --x");
    const Vector b = load_vector(c.b);
    const Vector x = load_vector(c.x);
    CertifyOptions opts;
    opts.enumeration = eo;
    opts.beta = beta;
    if (c.theorem == "card") {
      if (c.n_gap < 1) throw std::invalid_argument("certify card needs --n-gap N >= 1");
      out = to_json(certify_card_minimizer(a, b, c.mu, x, c.n_gap, opts));
    } else {
      if (c.k < 1) throw std::invalid_argument("certify pk needs --k K >= 1");
      out = to_json(certify_pk_minimizer(a, b, c.k, x, opts));
    }
  } else if (c.theorem == "oracle-card" || c.theorem == "oracle-pk") {
    if (c.x0.empty() || !c.eps_norm) throw std::invalid_argument("certify " + c.theorem + " needs --x0 and --eps-norm");
    const Vector x0 = load_vector(c.x0);
    const int kk = c.k > 0 ? c.k : static_cast<int>(cardinality(x0));
    if (kk < 1) throw std::invalid_argument("x0 has empty support");
    if (c.theorem == "oracle-card") {
      const int gap = c.n_gap > 0 ? c.n_gap : 2 * kk;
      const double bn = beta(gap), bk = beta(kk);
      out = to_json(guarantee_oracle_card(bn, bk, x0, *c.eps_norm, c.mu, gap));
      out["beta_N"] = bn;
      out["beta_K"] = bk;
      out["N"] = gap;
    } else {
      const double bk = beta(kk), b2k = beta(std::min<int>(2 * kk, static_cast<int>(a.n())));
      out = to_json(guarantee_oracle_pk(bk, b2k, x0, *c.eps_norm));
      out["beta_K"] = bk;
      out["beta_2K"] = b2k;
    }
    out["theorem"] = c.theorem;
    out["version"] = kVersion;
  } else {
    throw std::invalid_argument("unknown theorem '" + c.theorem + "' (card, pk, oracle-card, oracle-pk)");
  }
  if (cache) cache->save();
  if (!c.out.empty()) save_json(c.out, out);
  std::cout << out.dump(2) << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct ConstantsArgs {
  std::string a, out = "constants";
  int m = 17, n = 25, kmax = 8, matrices = 1;
  std::uint64_t seed = 1;
  bool beta = true, delta = false;
  EnumFlags en;
};

int run_constants(const ConstantsArgs& c) {
  const EnumerationOptions eo = c.en.options();
  ConstantsReport rep;
  if (!c.a.empty()) {
    const SensingMatrix a(load_matrix(c.a));
    rep.m = a.m();
    rep.n = a.n();
    rep.k_max = c.kmax;
    rep.with_delta = c.delta;
    rep.matrices.push_back(constants_for_matrix(a, c.kmax, c.delta, eo, rep.warnings));
  } else {
    rep = run_constants_table(c.m, c.n, c.kmax, c.matrices, c.seed, c.delta, eo);
  }
  const fs::path dir(c.out);
  {
    auto os = open_output(dir / "constants.csv");
    write_constants_csv(os, rep);
  }
  save_json(dir / "constants.json", to_json(rep));
  std::vector<PlotSeries> series;
  for (std::size_t i = 0; i < rep.matrices.size() && i < 6; ++i) {
    PlotSeries s;
    s.name = "matrix " + std::to_string(i);
    for (const auto& [k, b] : rep.matrices[i].table.betas)
      if (b > 0.0) {
        s.xs.push_back(k);
        s.ys.push_back(1.0 / b);
      }
    series.push_back(std::move(s));
  }
  {
    auto os = open_output(dir / "inv_beta.svg");
    os << render_line_plot_svg("1 / beta_k", "k", "1 / beta_k", series);
  }
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
  for (std::size_t i = 0; i < rep.matrices.size(); ++i) {
    const auto& e = rep.matrices[i];
    std::cout << "matrix " << i << ":";
    for (const auto& [k, b] : e.table.betas) std::cout << " beta_" << k << "=" << format_double(b);
    for (const auto& [k, cr] : e.crt)
      std::cout << " | crt(K=" << k << ") " << (cr.holds ? "holds" : "fails") << " lhs=" << format_double(cr.lhs);
    std::cout << "\n";
  }
  std::cout << "wrote " << (dir / "constants.csv").string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
  int m = 100, n = 200, k = 10, trials = 50, max_iter = 1000;
  double mu = 1.0, tol = 1e-10;
  std::uint64_t seed = 1;
  std::string noise_grid = "0,0.5,1,1.5,2,2.5,3,3.5,4,4.5,5";
  std::vector<std::string> methods{"l1", "card", "pk", "qcard", "qpk"};
  std::string start = "zero", out = "sweep";
  unsigned threads = 0;
  double hist_noise = 2.5;
};

SweepConfig sweep_config(const SweepArgs& s) {
  SweepConfig c;
  c.m = s.m;
  c.n = s.n;
  c.k = s.k;
  c.trials = s.trials;
  c.max_iter = s.max_iter;
  c.mu = s.mu;
  c.stop_tol = s.tol;
  c.seed = s.seed;
  c.noise_grid = parse_grid(s.noise_grid);
  c.methods.clear();
  for (const auto& m : s.methods) c.methods.push_back(parse_method(m));
  c.start = parse_start(s.start);
  c.threads = s.threads;
  return c;
}

int run_sweep(const SweepArgs& s) {
  const SweepReport rep = run_noise_sweep(sweep_config(s));
  const fs::path dir(s.out);
  {
    auto os = open_output(dir / "sweep.csv");
    write_sweep_csv(os, rep);
  }
  {
    auto os = open_output(dir / "trials.csv");
    write_trials_csv(os, rep.records);
  }
  save_json(dir / "sweep.json", to_json(rep));
  {
    auto os = open_output(dir / "err_x0.svg");
    os << render_sweep_svg(rep, false);
  }
  {
    auto os = open_output(dir / "err_xs.svg");
    os << render_sweep_svg(rep, true);
  }
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "method  noise  err_x0    err_xs    recovery  card\n";
  for (const auto& c : rep.cells) {
    char line[128];
    std::snprintf(line, sizeof line, "%-6s  %5.2f  %8.4f  %8.4f  %8.2f  %6.2f\n", method_name(c.method).c_str(),
                  c.noise, c.mean_err_x0, c.mean_err_xs, c.recovery_rate, c.mean_card);
    std::cout << line;
  }
  std::cout << "wrote " << (dir / "sweep.csv").string() << " (" << rep.wall_seconds << " s)\n";
  int diverged = 0;
  for (const auto& c : rep.cells) diverged += c.diverged;
  return diverged > 0 ? kDiverged : kOk;
}

int run_hist(const SweepArgs& s) {
  SweepArgs copy = s;
  copy.methods = {"qcard"};
  const HistReport h = run_cardinality_histogram(sweep_config(copy), s.hist_noise);
  const fs::path dir(s.out);
  {
    auto os = open_output(dir / "hist.csv");
    write_hist_csv(os, h);
  }
  save_json(dir / "hist.json", to_json(h));
  {
    auto os = open_output(dir / "hist.svg");
    os << render_histogram_svg("cardinality over " + std::to_string(s.trials) + " trials, ||eps|| = " +
                                   detail::fmt_tick(s.hist_noise),
                               h.counts);
  }
  for (std::size_t c = 0; c < h.counts.size(); ++c)
    if (h.counts[c]) std::cout << "card " << c << ": " << h.counts[c] << "\n";
  std::cout << "wrote " << (dir / "hist.csv").string() << "\n";
  int diverged = 0;
  for (const auto& r : h.records) diverged += r.diverged ? 1 : 0;
  return diverged > 0 ? kDiverged : kOk;
}

void add_sweep_options(CLI::App* app, SweepArgs& s, bool hist) {
  app->add_option("--m", s.m, "rows");
  app->add_option("--n", s.n, "columns");
  app->add_option("--k", s.k, "sparsity K");
  app->add_option("--trials", s.trials, "trials per noise level");
  app->add_option("--max-iter", s.max_iter, "FBS iterations");
  app->add_option("--tol", s.tol, "relative iterate-change stop tolerance");
  app->add_option("--mu", s.mu, "cardinality weight");
  app->add_option("--seed", s.seed, "master seed");
  app->add_option("--out", s.out, "output directory");
  app->add_option("--threads", s.threads, "worker threads (0: all cores)");
  if (hist) {
    app->add_option("--noise", s.hist_noise, "noise norm ||eps||");
    s.start = "ls";
    s.out = "hist";
  } else {
    app->add_option("--noise-grid", s.noise_grid, "comma-separated ascending noise norms");
    app->add_option("--methods", s.methods, "subset of l1 card pk qcard qpk")->delimiter(',');
  }
  app->add_option("--start", s.start, "zero or ls");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quadratic-envelope sparse recovery: solvers, constants and certificates"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "TOML configuration file; sections name subcommands");
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "generate a random instance (A, x0, eps, b)");
  g->add_option("--m", gen.m, "rows");
  g->add_option("--n", gen.n, "columns");
  g->add_option("--k", gen.k, "support size");
  g->add_option("--noise", gen.noise, "noise norm ||eps||");
  g->add_option("--lo", gen.lo, "smallest pre-scale magnitude");
  g->add_option("--hi", gen.hi, "largest pre-scale magnitude");
  g->add_option("--norm", gen.norm, "||x0|| after rescaling (0: no rescale)");
  g->add_option("--seed", gen.seed, "seed");
  g->add_option("--out", gen.out, "output directory");

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "run forward-backward splitting on one instance");
  s->add_option("--a", solve.a, "matrix CSV")->required();
  s->add_option("--b", solve.b, "measurement CSV")->required();
  s->add_option("--method", solve.method, "l1, card, pk, qcard or qpk");
  s->add_option("--mu", solve.mu, "cardinality weight");
  s->add_option("--lambda", solve.lambda, "l1 weight");
  s->add_option("--k", solve.k, "sparsity K");
  s->add_option("--step", solve.step, "step size t (default 0.45 / ||A||^2)");
  s->add_option("--max-iter", solve.max_iter, "iteration limit");
  s->add_option("--tol", solve.tol, "relative iterate-change stop tolerance");
  s->add_option("--start", solve.start, "zero, ls or file");
  s->add_option("--start-file", solve.start_file, "start vector CSV for --start file");
  s->add_option("--out", solve.out, "write x' to this CSV");

  CertifyArgs cert;
  auto* c = app.add_subcommand("certify", "check optimality certificates or oracle guarantees");
  c->add_option("--a", cert.a, "matrix CSV")->required();
  c->add_option("--b", cert.b, "measurement CSV");
  c->add_option("--x", cert.x, "candidate x' CSV");
  c->add_option("--x0", cert.x0, "ground truth CSV (oracle theorems)");
  c->add_option("--eps-norm", cert.eps_norm, "noise norm (oracle theorems)");
  c->add_option("--theorem", cert.theorem, "card, pk, oracle-card or oracle-pk");
  c->add_option("--n-gap", cert.n_gap, "gap parameter N");
  c->add_option("--mu", cert.mu, "cardinality weight");
  c->add_option("--k", cert.k, "sparsity K");
  c->add_option("--beta-cache", cert.beta_cache, "JSON sidecar caching beta_k");
  c->add_option("--out", cert.out, "write the report JSON here");
  cert.en.add(c);

  ConstantsArgs cons;
  auto* k = app.add_subcommand("constants", "beta_k / delta_k tables by exhaustive enumeration");
  k->add_option("--a", cons.a, "matrix CSV (default: random normalized Gaussian)");
  k->add_option("--m", cons.m, "rows of the random matrices");
  k->add_option("--n", cons.n, "columns of the random matrices");
  k->add_option("--matrices", cons.matrices, "number of random matrices");
  k->add_option("--seed", cons.seed, "master seed");
  k->add_option("--kmax", cons.kmax, "largest k");
  k->add_flag("--beta,!--no-beta", cons.beta, "report beta_k (always computed)");
  k->add_flag("--delta", cons.delta, "also compute delta_k and the delta_3K + 3 delta_4K < 2 check");
  k->add_option("--out", cons.out, "output directory");
  cons.en.add(k);

  SweepArgs sweep;
  auto* w = app.add_subcommand("sweep", "noise sweep over the five methods");
  add_sweep_options(w, sweep, false);

  SweepArgs hist;
  auto* h = app.add_subcommand("hist", "cardinality histogram for the envelope of mu card from the LS start");
  add_sweep_options(h, hist, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalidConfig;
  }

  try {
    if (*g) return run_gen(gen);
    if (*s) return run_solve(solve);
    if (*c) return run_certify(cert);
    if (*k) return run_constants(cons);
    if (*w) return run_sweep(sweep);
    if (*h) return run_hist(hist);
  } catch (const EnumerationCapExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCapExceeded;
  } catch (const SolverDiverged& e) {
    std::cerr << "error: " << e.what() << " after " << e.trace().size() - 1 << " iterations\n";
    return kDiverged;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalidConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kInvalidConfig;
}
