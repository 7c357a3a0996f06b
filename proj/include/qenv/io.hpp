#pragma once

// CSV and JSON serialization: matrices and vectors as plain numeric CSV,
// certificate reports as JSON, and a JSON sidecar cache for beta_k values.

#include "qenv/certificates.hpp"
#include "qenv/core.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace qenv {

using json = nlohmann::json;

/// Round-trip representation of a double (17 significant digits).
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// JSON has no infinities; they are written as null.
inline json json_number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// ---------------------------------------------------------------------------
// CSV

/// RFC-4180 field quoting: quoted when the field holds a comma, quote or
/// line break, with embedded quotes doubled.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}

  CsvWriter& field(const std::string& s) {
    sep();
    os_ << csv_field(s);
    return *this;
  }
  CsvWriter& field(const char* s) { return field(std::string(s)); }
  CsvWriter& field(double v) {
    sep();
    os_ << format_double(v);
    return *this;
  }
  template <class I>
    requires std::is_integral_v<I>
  CsvWriter& field(I v) {
    sep();
    os_ << v;
    return *this;
  }
  void end_row() {
    os_ << "\r\n";
    first_ = true;
  }
  template <class... Ts>
  void row(const Ts&... vs) {
    (field(vs), ...);
    end_row();
  }

 private:
  void sep() {
    if (!first_) os_ << ',';
    first_ = false;
  }
  std::ostream& os_;
  bool first_ = true;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

inline double parse_double(const std::string& s, const std::string& where) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument(where + ": not a number: '" + s + "'");
  }
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  if (pos != s.size()) throw std::invalid_argument(where + ": not a number: '" + s + "'");
  return v;
}

}  // namespace detail

inline void write_matrix_csv(std::ostream& os, const Matrix& a) {
  CsvWriter w(os);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) w.field(a(i, j));
    w.end_row();
  }
}

/// Numeric CSV, one matrix row per line; ragged rows are rejected.
inline Matrix read_matrix_csv(std::istream& is, const std::string& name = "matrix") {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> r;
    for (const auto& f : detail::split_csv_line(line))
      r.push_back(detail::parse_double(f, name + " line " + std::to_string(lineno)));
    if (!rows.empty() && r.size() != rows.front().size())
      throw std::invalid_argument(name + ": ragged row at line " + std::to_string(lineno));
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw std::invalid_argument(name + ": empty CSV");
  Matrix a(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return a;
}

/// Vectors are written one value per line.
inline void write_vector_csv(std::ostream& os, const Vector& v) {
  CsvWriter w(os);
  for (Eigen::Index i = 0; i < v.size(); ++i) w.row(v(i));
}

/// Accepts a single column or a single row.
inline Vector read_vector_csv(std::istream& is, const std::string& name = "vector") {
  const Matrix a = read_matrix_csv(is, name);
  if (a.cols() == 1) return a.col(0);
  if (a.rows() == 1) return a.row(0).transpose();
  throw std::invalid_argument(name + ": expected a single row or column");
}

inline std::ifstream open_input(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw std::invalid_argument("cannot open " + p.string());
  return in;
}

inline std::ofstream open_output(const std::filesystem::path& p) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

inline Matrix load_matrix(const std::filesystem::path& p) {
  auto in = open_input(p);
  return read_matrix_csv(in, p.string());
}

inline Vector load_vector(const std::filesystem::path& p) {
  auto in = open_input(p);
  return read_vector_csv(in, p.string());
}

inline void save_matrix(const std::filesystem::path& p, const Matrix& a) {
  auto out = open_output(p);
  write_matrix_csv(out, a);
}

inline void save_vector(const std::filesystem::path& p, const Vector& v) {
  auto out = open_output(p);
  write_vector_csv(out, v);
}

inline void save_json(const std::filesystem::path& p, const json& j) {
  auto out = open_output(p);
  out << j.dump(2) << '\n';
}

inline json vector_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(json_number(v(i)));
  return a;
}

// ---------------------------------------------------------------------------
// Reports

inline json to_json(const Hypothesis& h) {
  return {{"name", h.name}, {"lhs", json_number(h.lhs)}, {"relation", h.relation},
          {"rhs", json_number(h.rhs)}, {"pass", h.pass}, {"note", h.note}};
}

inline json to_json(const CertificateReport& r) {
  json j;
  j["theorem"] = r.theorem;
  j["verdict"] = to_string(r.verdict);
  j["reason"] = r.reason;
  j["hypotheses"] = json::array();
  for (const auto& h : r.hypotheses) j["hypotheses"].push_back(to_json(h));
  j["claims"] = r.claims;
  json betas = json::object();
  for (auto [k, b] : r.betas) betas[std::to_string(k)] = json_number(b);
  j["betas"] = betas;
  json bounds = json::object();
  for (const auto& [k, v] : r.bounds) bounds[k] = json_number(v);
  j["bounds"] = bounds;
  j["card"] = r.card;
  j["residual_sq"] = json_number(r.residual_sq);
  j["z"] = vector_json(r.z);
  j["version"] = kVersion;
  return j;
}

inline json to_json(const OracleGuarantee& g) {
  json margins = json::object();
  for (const auto& [k, v] : g.margins) margins[k] = json_number(v);
  return {{"holds", g.holds}, {"margins", margins}, {"error_bound", json_number(g.error_bound)},
          {"reason", g.reason}};
}

inline json to_json(const FeasibilityVerdict& v) {
  return {{"status", to_string(v.status)}, {"witness", v.witness}, {"witness_subset", v.witness_subset}};
}

/// k, beta_k, delta_k, subsets_scanned; delta left empty where not computed.
inline void write_rlip_csv(std::ostream& os, const RlipTable& t) {
  CsvWriter w(os);
  w.row("k", "beta_k", "delta_k", "subsets_scanned");
  for (const auto& [k, beta] : t.betas) {
    w.field(k).field(beta);
    if (auto it = t.deltas.find(k); it != t.deltas.end())
      w.field(it->second);
    else
      w.field("");
    auto c = t.enumeration_counts.find(k);
    w.field(c == t.enumeration_counts.end() ? std::uint64_t{0} : c->second);
    w.end_row();
  }
}

// ---------------------------------------------------------------------------
// Beta cache

/// FNV-1a over the dimensions and the raw entry bytes.
inline std::uint64_t matrix_fingerprint(const Matrix& a) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= c[i];
      h *= 0x100000001b3ULL;
    }
  };
  const std::int64_t dims[2] = {a.rows(), a.cols()};
  feed(dims, sizeof dims);
  feed(a.data(), sizeof(double) * static_cast<std::size_t>(a.size()));
  return h;
}

inline std::string fingerprint_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// beta_k values keyed by (matrix fingerprint, k), persisted as JSON.
class BetaCache {
 public:
  BetaCache() = default;
  explicit BetaCache(std::filesystem::path path) : path_(std::move(path)) {
    if (std::filesystem::exists(path_)) {
      auto in = open_input(path_);
      try {
        data_ = json::parse(in);
      } catch (const json::exception& e) {
        throw std::invalid_argument("beta cache " + path_.string() + ": " + e.what());
      }
      if (!data_.is_object()) throw std::invalid_argument("beta cache: expected a JSON object");
    }
  }

  std::optional<double> get(const Matrix& a, int k) const {
    const std::string key = fingerprint_hex(matrix_fingerprint(a));
    if (!data_.contains(key)) return std::nullopt;
    const json& e = data_[key];
    const std::string ks = std::to_string(k);
    if (!e.contains(ks)) return std::nullopt;
    return e[ks].get<double>();
  }

  void put(const Matrix& a, int k, double beta) {
    data_[fingerprint_hex(matrix_fingerprint(a))][std::to_string(k)] = beta;
  }

  void save() const {
    if (!path_.empty()) save_json(path_, data_);
  }

  /// Provider that consults the cache and enumerates on a miss.
  BetaProvider provider(const SensingMatrix& a, EnumerationOptions opts = {}) {
    return [this, &a, opts](int k) {
      if (auto v = get(a.entries(), k)) return *v;
      const double b = rlip_beta(a, k, opts);
      put(a.entries(), k, b);
      return b;
    };
  }

 private:
  std::filesystem::path path_;
  json data_ = json::object();
};

}  // namespace qenv
