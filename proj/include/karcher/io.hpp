#pragma once

// File formats.
//
// Ensemble / mean files:  {"dim": p, "matrices": [[[row...]...]...]}
// Experiment specs:       the ExperimentSpec fields as a JSON object.
// Report CSV:             iter,<solver id>,... with mean natural-log errors.
//
// Every floating-point value is written with 17 significant digits so that a
// write/read cycle reproduces doubles bitwise.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "karcher/bench.hpp"
#include "karcher/error.hpp"
#include "karcher/matrix.hpp"
#include "karcher/objective.hpp"
#include "karcher/solvers.hpp"
#include "karcher/spd.hpp"

namespace karcher::io {

using json = nlohmann::json;

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Ensemble files

/// Structural parse only: shapes are checked, symmetry and positivity are not.
inline std::vector<Matrix<double>> parse_matrices_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& err) {
    throw ParseError(std::string("invalid JSON: ") + err.what());
  }
  if (!doc.is_object()) throw ParseError("top level must be an object with \"dim\" and \"matrices\"");
  if (!doc.contains("dim") || !doc["dim"].is_number_integer() || doc["dim"].get<long long>() < 1)
    throw ParseError("\"dim\" must be a positive integer");
  if (!doc.contains("matrices") || !doc["matrices"].is_array() || doc["matrices"].empty())
    throw ParseError("\"matrices\" must be a non-empty array");

  const std::size_t p = doc["dim"].get<std::size_t>();
  std::vector<Matrix<double>> out;
  const json& mats = doc["matrices"];
  for (std::size_t i = 0; i < mats.size(); ++i) {
    const std::string where = "matrix " + std::to_string(i) + ": ";
    const json& rows = mats[i];
    if (!rows.is_array() || rows.size() != p)
      throw ParseError(where + "expected " + std::to_string(p) + " rows", i);
    Matrix<double> m(p, p);
    for (std::size_t r = 0; r < p; ++r) {
      const json& row = rows[r];
      if (!row.is_array() || row.size() != p)
        throw ParseError(where + "row " + std::to_string(r) + " must have " + std::to_string(p) +
                             " entries",
                         i);
      for (std::size_t c = 0; c < p; ++c) {
        if (!row[c].is_number())
          throw ParseError(where + "entry (" + std::to_string(r) + ", " + std::to_string(c) +
                               ") is not a number",
                           i);
        m(r, c) = row[c].get<double>();
      }
    }
    out.push_back(std::move(m));
  }
  return out;
}

/// Parses and validates: each matrix must be symmetric to 1e-12 relative and positive definite.
inline Ensemble<double> parse_ensemble_json(std::string_view text) {
  std::vector<Matrix<double>> raw = parse_matrices_json(text);
  std::vector<SpdMatrix<double>> mats;
  mats.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const std::string where = "matrix " + std::to_string(i) + ": ";
    try {
      mats.emplace_back(raw[i]);
    } catch (const NotSymmetric& err) {
      std::ostringstream os;
      os << where << "not symmetric (relative asymmetry " << err.relative_asymmetry() << ")";
      throw ParseError(os.str(), i);
    } catch (const NotPositiveDefinite& err) {
      std::ostringstream os;
      os << where << "not positive definite (eigenvalue " << format_double(err.eigenvalue()) << ")";
      throw ParseError(os.str(), i);
    }
  }
  return Ensemble<double>(std::move(mats));
}

inline Ensemble<double> read_ensemble_file(const std::filesystem::path& path) {
  return parse_ensemble_json(read_text(path));
}

inline std::string matrices_to_json(std::span<const Matrix<double>> mats) {
  if (mats.empty()) throw InvalidArgument("matrices_to_json: nothing to write");
  const std::size_t p = mats.front().rows();
  std::ostringstream os;
  os << "{\n  \"dim\": " << p << ",\n  \"matrices\": [";
  for (std::size_t i = 0; i < mats.size(); ++i) {
    if (mats[i].rows() != p || mats[i].cols() != p)
      throw DimensionMismatch("matrices_to_json: matrix " + std::to_string(i) + " is " +
                              mats[i].shape());
    os << (i ? ",\n    [" : "\n    [");
    for (std::size_t r = 0; r < p; ++r) {
      os << (r ? ",\n     [" : "[");
      for (std::size_t c = 0; c < p; ++c) os << (c ? ", " : "") << format_double(mats[i](r, c));
      os << "]";
    }
    os << "]";
  }
  os << "\n  ]\n}\n";
  return os.str();
}

inline void write_matrices_file(const std::filesystem::path& path,
                                std::span<const Matrix<double>> mats) {
  write_text(path, matrices_to_json(mats));
}

// ---------------------------------------------------------------------------
// CSV output

inline void write_trace_csv(std::ostream& os, std::span<const TraceRecord> trace) {
  os << "iter,objective,grad_norm,log_error,elapsed\n";
  for (const auto& r : trace)
    os << r.iter << ',' << format_double(r.objective) << ',' << format_double(r.grad_norm) << ','
       << format_double(r.log_error) << ',' << format_double(r.elapsed) << '\n';
}

/// One row per iteration, one column per solver; shorter series repeat their last value.
inline void write_report_csv(std::ostream& os, const bench::ExperimentReport& report) {
  os << "iter";
  for (const auto& s : report.series) os << ',' << s.id;
  os << '\n';
  for (std::size_t k = 0; k < report.rows(); ++k) {
    os << k;
    for (const auto& s : report.series) {
      const auto& m = s.mean_log_error;
      os << ',' << (m.empty() ? std::string("nan") : format_double(m[std::min(k, m.size() - 1)]));
    }
    os << '\n';
  }
}

/// Per-run summary: solver,run,status,iters_used,final_log_error,error.
inline void write_runs_csv(std::ostream& os, const bench::ExperimentReport& report) {
  os << "solver,run,status,iters_used,final_log_error,error\n";
  for (const auto& s : report.series)
    for (std::size_t r = 0; r < s.runs.size(); ++r) {
      const auto& run = s.runs[r];
      std::string error = run.error;
      for (char& ch : error)
        if (ch == ',' || ch == '\n' || ch == '"') ch = ' ';
      os << s.id << ',' << r << ',' << (run.failed ? "error" : std::string(to_string(run.status)))
         << ',' << run.iters_used << ','
         << (run.trace.empty() ? std::string("nan") : format_double(run.trace.back().log_error))
         << ',' << error << '\n';
    }
}

// ---------------------------------------------------------------------------
// Experiment specs

namespace detail {

inline void reject_unknown(const json& obj, const std::string& path,
                           std::initializer_list<std::string_view> known) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (auto k : known) ok = ok || item.key() == k;
    if (!ok) throw InvalidArgument(path + (path.empty() ? "" : ".") + item.key() + ": unknown field");
  }
}

inline std::string field_path(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

inline double get_number(const json& obj, const std::string& path, std::string_view key,
                         double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(std::string(key));
  if (!v.is_number()) throw InvalidArgument(field_path(path, key) + ": expected a number");
  return v.get<double>();
}

inline long long get_integer(const json& obj, const std::string& path, std::string_view key,
                             long long fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(std::string(key));
  if (!v.is_number_integer()) throw InvalidArgument(field_path(path, key) + ": expected an integer");
  return v.get<long long>();
}

inline json config_to_json(const SolverConfig& cfg) {
  json j;
  j["max_iters"] = cfg.max_iters;
  j["grad_tol"] = cfg.grad_tol ? json(*cfg.grad_tol) : json(nullptr);
  j["nu"] = cfg.nu;
  j["c"] = cfg.c;
  j["ls_max_j"] = cfg.ls_max_j;
  return j;
}

inline SolverConfig config_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) throw InvalidArgument(path + ": expected an object");
  reject_unknown(j, path, {"max_iters", "grad_tol", "nu", "c", "ls_max_j"});
  SolverConfig cfg;
  cfg.max_iters = int(get_integer(j, path, "max_iters", cfg.max_iters));
  if (j.contains("grad_tol") && !j["grad_tol"].is_null())
    cfg.grad_tol = get_number(j, path, "grad_tol", 0.0);
  cfg.nu = get_number(j, path, "nu", cfg.nu);
  cfg.c = get_number(j, path, "c", cfg.c);
  cfg.ls_max_j = int(get_integer(j, path, "ls_max_j", cfg.ls_max_j));
  try {
    cfg.validate();
  } catch (const InvalidArgument& err) {
    throw InvalidArgument(path + ": " + err.what());
  }
  return cfg;
}

}  // namespace detail

inline json spec_to_json(const bench::ExperimentSpec& spec) {
  json s;
  s["kind"] = std::string(to_string(spec.spectrum.kind));
  s["dim"] = spec.spectrum.dim;
  switch (spec.spectrum.kind) {
    case bench::SpectrumKind::uniform:
      s["lo"] = spec.spectrum.lo;
      s["hi"] = spec.spectrum.hi;
      break;
    case bench::SpectrumKind::geometric: s["a"] = spec.spectrum.a; break;
    case bench::SpectrumKind::explicit_values: s["values"] = spec.spectrum.values; break;
  }
  json solvers = json::array();
  for (const auto& sv : spec.solvers)
    solvers.push_back({{"id", sv.id},
                       {"kind", std::string(to_string(sv.kind))},
                       {"config", detail::config_to_json(sv.config)}});
  json j;
  j["n"] = spec.n;
  j["p"] = spec.p;
  j["spectrum"] = s;
  j["scale_first_by"] = spec.scale_first_by;
  j["runs"] = spec.runs;
  j["seed"] = spec.seed;
  j["solvers"] = solvers;
  return j;
}

/// Builds and validates a spec. Errors name the offending field, e.g.
/// "solvers[1].config: c must be in (0, 1)".
inline bench::ExperimentSpec spec_from_json(const json& j) {
  using detail::get_integer;
  using detail::get_number;
  if (!j.is_object()) throw InvalidArgument("spec: expected a JSON object");
  detail::reject_unknown(j, "", {"n", "p", "spectrum", "scale_first_by", "runs", "seed", "solvers"});

  bench::ExperimentSpec spec;
  for (const char* key : {"n", "p"})
    if (!j.contains(key)) throw InvalidArgument(std::string(key) + ": required");
  const long long n = get_integer(j, "", "n", 0);
  const long long p = get_integer(j, "", "p", 0);
  if (n < 1) throw InvalidArgument("n: must be >= 1");
  if (p < 1) throw InvalidArgument("p: must be >= 1");
  spec.n = std::size_t(n);
  spec.p = std::size_t(p);

  if (!j.contains("spectrum") || !j["spectrum"].is_object())
    throw InvalidArgument("spectrum: required object");
  const json& s = j["spectrum"];
  detail::reject_unknown(s, "spectrum", {"kind", "dim", "lo", "hi", "a", "values"});
  if (!s.contains("kind") || !s["kind"].is_string())
    throw InvalidArgument("spectrum.kind: expected \"uniform\", \"geometric\" or \"explicit\"");
  const std::string kind = s["kind"];
  const long long dim = get_integer(s, "spectrum", "dim", p);
  if (dim < 1) throw InvalidArgument("spectrum.dim: must be >= 1");
  if (kind == "uniform") {
    spec.spectrum = bench::SpectrumSpec::uniform(std::size_t(dim),
                                                 get_number(s, "spectrum", "lo", 1.0),
                                                 get_number(s, "spectrum", "hi", 10.0));
  } else if (kind == "geometric") {
    if (!s.contains("a")) throw InvalidArgument("spectrum.a: required for geometric spectra");
    spec.spectrum = bench::SpectrumSpec::geometric(std::size_t(dim), get_number(s, "spectrum", "a", 0.0));
  } else if (kind == "explicit") {
    if (!s.contains("values") || !s["values"].is_array())
      throw InvalidArgument("spectrum.values: required array for explicit spectra");
    std::vector<double> values;
    for (const auto& v : s["values"]) {
      if (!v.is_number()) throw InvalidArgument("spectrum.values: entries must be numbers");
      values.push_back(v.get<double>());
    }
    spec.spectrum = bench::SpectrumSpec::explicit_values(std::move(values));
    spec.spectrum.dim = std::size_t(dim);
  } else {
    throw InvalidArgument("spectrum.kind: unknown kind '" + kind + "'");
  }

  spec.scale_first_by = get_number(j, "", "scale_first_by", 1.0);
  spec.runs = int(get_integer(j, "", "runs", 1));
  const long long seed = get_integer(j, "", "seed", 0);
  if (seed < 0) throw InvalidArgument("seed: must be >= 0");
  spec.seed = std::uint64_t(seed);

  if (!j.contains("solvers")) {
    spec.solvers = bench::standard_solvers();
  } else {
    if (!j["solvers"].is_array()) throw InvalidArgument("solvers: expected an array");
    for (std::size_t k = 0; k < j["solvers"].size(); ++k) {
      const std::string path = "solvers[" + std::to_string(k) + "]";
      const json& sv = j["solvers"][k];
      if (!sv.is_object()) throw InvalidArgument(path + ": expected an object");
      detail::reject_unknown(sv, path, {"id", "kind", "config"});
      if (!sv.contains("kind") || !sv["kind"].is_string())
        throw InvalidArgument(path + ".kind: expected \"mm\", \"gd-ls\" or \"gd-fixed\"");
      const auto parsed = parse_solver_kind(sv["kind"].get<std::string>());
      if (!parsed) throw InvalidArgument(path + ".kind: unknown solver '" + sv["kind"].get<std::string>() + "'");
      bench::SolverSpec solver;
      solver.kind = *parsed;
      if (sv.contains("config")) solver.config = detail::config_from_json(sv["config"], path + ".config");
      if (sv.contains("id")) {
        if (!sv["id"].is_string()) throw InvalidArgument(path + ".id: expected a string");
        solver.id = sv["id"];
      } else {
        solver.id = bench::default_solver_id(solver.kind, solver.config);
      }
      spec.solvers.push_back(std::move(solver));
    }
  }
  spec.validate();
  return spec;
}

inline bench::ExperimentSpec read_spec_file(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_text(path));
  } catch (const json::parse_error& err) {
    throw InvalidArgument(std::string("spec: invalid JSON: ") + err.what());
  } catch (const ParseError& err) {
    throw InvalidArgument(err.what());
  }
  return spec_from_json(doc);
}

}  // namespace karcher::io
