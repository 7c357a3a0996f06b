#include "qenv/qenv.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

using namespace qenv;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("qenv_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

SweepConfig small_sweep() {
  SweepConfig c;
  c.m = 20;
  c.n = 40;
  c.k = 3;
  c.noise_grid = {0.0, 0.5};
  c.trials = 4;
  c.x0_norm = 0.0;
  c.max_iter = 300;
  return c;
}

}  // namespace

TEST(Csv, FieldQuoting) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_field("two\nlines"), "\"two\nlines\"");
  std::ostringstream os;
  CsvWriter(os).row("x", 1, 2.5);
  EXPECT_EQ(os.str(), "x,1,2.5\r\n");
}

TEST(Csv, SplitHandlesQuotes) {
  const auto f = detail::split_csv_line("a,\"b,c\",\"d\"\"e\",");
  ASSERT_EQ(f.size(), 4u);
  EXPECT_EQ(f[1], "b,c");
  EXPECT_EQ(f[2], "d\"e");
  EXPECT_EQ(f[3], "");
}

TEST(Csv, MatrixRoundTripIsExact) {
  const Matrix a = generate_sensing_matrix(7, 5, 3).entries();
  std::stringstream ss;
  write_matrix_csv(ss, a);
  const Matrix b = read_matrix_csv(ss);
  EXPECT_TRUE((a.array() == b.array()).all());
}

TEST(Csv, VectorAcceptsRowOrColumn) {
  std::istringstream col("1\n2\n3\n"), row("1,2,3\n");
  EXPECT_EQ(read_vector_csv(col), (Vector(3) << 1, 2, 3).finished());
  EXPECT_EQ(read_vector_csv(row), (Vector(3) << 1, 2, 3).finished());
  std::istringstream grid("1,2\n3,4\n");
  EXPECT_THROW(read_vector_csv(grid), std::invalid_argument);
}

TEST(Csv, RejectsBadInput) {
  std::istringstream ragged("1,2\n3\n"), text("1,x\n"), empty("");
  EXPECT_THROW(read_matrix_csv(ragged), std::invalid_argument);
  EXPECT_THROW(read_matrix_csv(text), std::invalid_argument);
  EXPECT_THROW(read_matrix_csv(empty), std::invalid_argument);
  EXPECT_THROW(load_matrix("/nonexistent/qenv.csv"), std::invalid_argument);
}

TEST(Json, NonFiniteBecomesNull) {
  EXPECT_TRUE(json_number(kInfinity).is_null());
  EXPECT_EQ(json_number(1.5).get<double>(), 1.5);
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
}

TEST(Json, CertificateReportSerializes) {
  const SensingMatrix a(Matrix::Identity(3, 3));
  const Vector b = (Vector(3) << 3.0, 0.0, 0.2).finished();
  const Vector x = (Vector(3) << 3.0, 0.0, 0.0).finished();
  const json j = to_json(certify_card_minimizer(a, b, 1.0, x, 3));
  EXPECT_EQ(j["verdict"], "UniqueGlobalMin");
  ASSERT_TRUE(j["hypotheses"].is_array());
  for (const auto& h : j["hypotheses"]) {
    EXPECT_TRUE(h.contains("lhs"));
    EXPECT_TRUE(h.contains("rhs"));
    EXPECT_TRUE(h.contains("pass"));
  }
}

TEST(BetaCache, PersistsAndAvoidsRecomputation) {
  const auto dir = scratch("cache");
  const auto path = dir / "betas.json";
  const SensingMatrix a = generate_sensing_matrix(6, 9, 1);
  {
    BetaCache c(path);
    EXPECT_FALSE(c.get(a.entries(), 3));
    const double b = c.provider(a)(3);
    EXPECT_EQ(b, rlip_beta(a, 3));
    c.save();
  }
  BetaCache c(path);
  ASSERT_TRUE(c.get(a.entries(), 3));
  EXPECT_EQ(*c.get(a.entries(), 3), rlip_beta(a, 3));
  EXPECT_FALSE(c.get(generate_sensing_matrix(6, 9, 2).entries(), 3));
  c.put(a.entries(), 4, 0.123);
  EXPECT_EQ(c.provider(a)(4), 0.123);
  std::filesystem::remove_all(dir);
}

TEST(BetaCache, RejectsCorruptFile) {
  const auto dir = scratch("corrupt");
  std::filesystem::create_directories(dir);
  { std::ofstream(dir / "c.json") << "not json"; }
  EXPECT_THROW(BetaCache(dir / "c.json"), std::invalid_argument);
  std::filesystem::remove_all(dir);
}

TEST(Methods, NamesRoundTrip) {
  for (Method m : all_methods()) EXPECT_EQ(parse_method(method_name(m)), m);
  EXPECT_THROW(parse_method("lasso"), std::invalid_argument);
}

TEST(Methods, L1LambdaIsDoubledFormula) {
  EXPECT_NEAR(l1_lambda(3.0, 200), 2.0 * (3.0 / std::sqrt(200.0)) * std::sqrt(2.0 * std::log(200.0)), 1e-15);
  EXPECT_EQ(l1_lambda(0.0, 200), 0.0);
}

TEST(Sweep, ValidatesConfig) {
  SweepConfig c = small_sweep();
  c.trials = 0;
  EXPECT_THROW(run_noise_sweep(c), std::invalid_argument);
  c = small_sweep();
  c.noise_grid = {1.0, 0.5};
  EXPECT_THROW(run_noise_sweep(c), std::invalid_argument);
  c.noise_grid = {-1.0};
  EXPECT_THROW(run_noise_sweep(c), std::invalid_argument);
}

TEST(Sweep, DeterministicAndByteIdentical) {
  SweepConfig c = small_sweep();
  c.threads = 1;
  const SweepReport r1 = run_noise_sweep(c);
  c.threads = 3;
  const SweepReport r2 = run_noise_sweep(c);
  std::ostringstream a, b, ta, tb;
  write_sweep_csv(a, r1);
  write_sweep_csv(b, r2);
  write_trials_csv(ta, r1.records);
  write_trials_csv(tb, r2.records);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(ta.str(), tb.str());
  EXPECT_EQ(r1.cells.size(), 10u);
  EXPECT_EQ(r1.records.size(), 40u);
  for (const auto& cell : r1.cells) EXPECT_EQ(cell.completed + cell.diverged, 4);
}

TEST(Sweep, AddingNoiseLevelsKeepsEarlierColumns) {
  SweepConfig c = small_sweep();
  c.methods = {Method::QuadEnvCard};
  const SweepReport r1 = run_noise_sweep(c);
  c.noise_grid.push_back(1.0);
  const SweepReport r2 = run_noise_sweep(c);
  for (double noise : {0.0, 0.5}) {
    EXPECT_EQ(r1.cell(Method::QuadEnvCard, noise).mean_err_x0, r2.cell(Method::QuadEnvCard, noise).mean_err_x0);
  }
}

TEST(Sweep, NoiselessEnvelopeRecovery) {
  SweepConfig c = small_sweep();
  c.noise_grid = {0.0};
  c.methods = {Method::QuadEnvCard, Method::QuadEnvPK};
  c.x0_lo = 2.0;
  c.x0_hi = 4.0;
  const SweepReport r = run_noise_sweep(c);
  for (const auto& cell : r.cells) {
    EXPECT_EQ(cell.recovery_rate, 1.0) << method_name(cell.method);
    EXPECT_LE(cell.mean_err_x0, 1e-6);
  }
}

TEST(Sweep, JsonEmbedsSeedsAndVersion) {
  const SweepReport r = run_noise_sweep(small_sweep());
  const json j = to_json(r);
  EXPECT_EQ(j["version"], kVersion);
  EXPECT_EQ(j["config"]["seed"], 1u);
  EXPECT_EQ(j["trial_seeds"].size(), 8u);
  EXPECT_TRUE(j.contains("wall_seconds"));
}

TEST(Hist, SingleTrial) {
  SweepConfig c = small_sweep();
  c.trials = 1;
  const HistReport h = run_cardinality_histogram(c, 0.5);
  ASSERT_EQ(h.records.size(), 1u);
  EXPECT_EQ(h.counts.size(), 41u);
  EXPECT_EQ(h.counts[h.records[0].card], 1);
  EXPECT_EQ(std::accumulate(h.counts.begin(), h.counts.end(), 0), 1);
}

TEST(Hist, NoiselessMassAtK) {
  SweepConfig c;
  c.trials = 5;
  const HistReport h = run_cardinality_histogram(c, 0.0);
  EXPECT_EQ(h.counts[10], 5);
  std::ostringstream os;
  write_hist_csv(os, h);
  EXPECT_EQ(os.str().substr(0, 12), "card,count\r\n");
}

TEST(Constants, IdentityMatrix) {
  std::vector<std::string> w;
  const ConstantsEntry e = constants_for_matrix(SensingMatrix(Matrix::Identity(8, 8)), 8, true, {}, w);
  for (int k = 1; k <= 8; ++k) EXPECT_NEAR(e.table.betas.at(k), 1.0, 1e-12);
  ASSERT_TRUE(e.crt.count(2));
  EXPECT_TRUE(e.crt.at(2).holds);
  EXPECT_TRUE(w.empty());
}

TEST(Constants, TruncatesAtCap) {
  EnumerationOptions o;
  o.cap = 500;
  const ConstantsReport r = run_constants_table(8, 20, 6, 1, 3, false, o);
  ASSERT_FALSE(r.warnings.empty());
  const auto& e = r.matrices.front();
  EXPECT_EQ(e.computed_up_to, 2);
  EXPECT_EQ(e.table.betas.count(3), 0u);
}

TEST(Constants, CsvIsDeterministic) {
  std::ostringstream a, b;
  write_constants_csv(a, run_constants_table(6, 9, 4, 2, 5, true));
  write_constants_csv(b, run_constants_table(6, 9, 4, 2, 5, true));
  EXPECT_EQ(a.str(), b.str());
}

TEST(Svg, RendersWellFormedDocuments) {
  const SweepReport r = run_noise_sweep(small_sweep());
  const std::string s = render_sweep_svg(r, false);
  EXPECT_EQ(s.rfind("<svg", 0), 0u);
  EXPECT_NE(s.find("</svg>"), std::string::npos);
  EXPECT_NE(s.find("qcard"), std::string::npos);
  const std::string h = render_histogram_svg("hist", {0, 3, 1});
  EXPECT_NE(h.find("</svg>"), std::string::npos);
}
