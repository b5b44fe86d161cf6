#pragma once

// CSV and JSON renderings of benchmark results. Field order is fixed and
// numbers use shortest round-trip formatting, so equal inputs give
// byte-identical files.

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "borelknn/bench/consistency.hpp"
#include "borelknn/bench/cv.hpp"
#include "borelknn/bench/mm2.hpp"
#include "borelknn/core/error.hpp"
#include "borelknn/instability/instability.hpp"
#include "borelknn/version.hpp"

namespace borelknn {

using Json = nlohmann::ordered_json;

enum class ReportFormat { csv, json };

inline ReportFormat parse_report_format(const std::string& text) {
  if (text == "csv") return ReportFormat::csv;
  if (text == "json") return ReportFormat::json;
  detail::fail("unknown report format '" + text + "'");
}

/// What produced a report: subcommand, master seed, resolved configuration.
struct ReportContext {
  std::string command;
  std::uint64_t seed = 0;
  Json config = Json::object();
};

namespace detail {

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline Json header(const ReportContext& ctx) {
  Json j;
  j["tool"] = "borelknn";
  j["version"] = version;
  j["command"] = ctx.command;
  j["seed"] = ctx.seed;
  j["config"] = ctx.config;
  return j;
}

inline void csv_header(std::ostream& out, const ReportContext& ctx) {
  out << "# borelknn " << version << " " << ctx.command << " seed=" << ctx.seed << "\n";
  out << "# config=" << ctx.config.dump() << "\n";
}

}  // namespace detail

inline Json to_json(const CvReport& r) {
  Json j;
  j["variant"] = to_string(r.variant);
  j["n"] = r.n;
  j["folds"] = r.folds;
  j["k_max"] = r.k_max;
  if (r.variant == CvVariant::reduced) {
    j["bits"] = r.bits;
    j["group_size"] = r.group_size;
  }
  j["strict"] = r.strict;
  j["best_k"] = r.best_k;
  j["best_accuracy"] = r.best_accuracy();
  j["correctly_classified"] = r.best_correct();
  j["incorrectly_classified"] = r.best_incorrect();
  j["accuracy"] = r.accuracy;
  j["correct"] = r.correct;
  return j;
}

inline Json to_json(const ConsistencyCurve& c) {
  Json j;
  j["n_grid"] = c.n_grid;
  j["trials"] = c.trials;
  j["test_size"] = c.test_size;
  j["bayes_error"] = c.bayes;
  j["mean_error"] = c.mean_error;
  j["stddev_error"] = c.stddev_error;
  j["mean_excess"] = c.mean_excess;
  j["errors"] = c.errors;
  return j;
}

inline Json to_json(const InstabilityProfile& p) {
  Json j;
  j["k"] = p.k;
  j["c"] = p.c;
  j["queries"] = p.queries.size();
  j["mean_knn_radius"] = p.mean_eps_knn;
  j["mean_inflated_radius"] = p.mean_inflated_radius;
  j["mean_inflated_count"] = p.mean_inflated_count;
  j["unstable_fraction"] = p.unstable_fraction;
  j["radius"] = p.radius_grid;
  j["mean_count"] = p.mean_count;
  return j;
}

inline std::string render_json(const Json& results, const ReportContext& ctx) {
  Json doc = detail::header(ctx);
  doc["results"] = results;
  return doc.dump(2) + "\n";
}

inline std::string render_csv(const std::vector<CvReport>& reports, const ReportContext& ctx) {
  std::ostringstream out;
  detail::csv_header(out, ctx);
  out << "variant,k,correct,accuracy\n";
  for (const auto& r : reports)
    for (std::size_t k = 1; k <= r.k_max; ++k)
      out << to_string(r.variant) << ',' << k << ',' << r.correct[k - 1] << ',' << detail::fmt(r.accuracy[k - 1])
          << '\n';
  return out.str();
}

inline std::string render_csv(const ConsistencyCurve& c, const ReportContext& ctx) {
  std::ostringstream out;
  detail::csv_header(out, ctx);
  out << "n,mean_error,stddev_error,mean_excess,bayes_error\n";
  for (std::size_t g = 0; g < c.n_grid.size(); ++g)
    out << c.n_grid[g] << ',' << detail::fmt(c.mean_error[g]) << ',' << detail::fmt(c.stddev_error[g]) << ','
        << detail::fmt(c.mean_excess[g]) << ',' << detail::fmt(c.bayes) << '\n';
  return out.str();
}

/// The distance -> mean count curve.
inline std::string render_csv(const InstabilityProfile& p, const ReportContext& ctx) {
  std::ostringstream out;
  detail::csv_header(out, ctx);
  out << "radius,mean_count\n";
  for (std::size_t g = 0; g < p.radius_grid.size(); ++g)
    out << detail::fmt(p.radius_grid[g]) << ',' << detail::fmt(p.mean_count[g]) << '\n';
  return out.str();
}

/// Writes `text` to `path` ("-" is standard output, handled by the caller).
inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw format_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw format_error("write to '" + path + "' failed");
}

template <class Result>
void emit_report(const Result& results, ReportFormat format, const std::string& path, const ReportContext& ctx) {
  if (format == ReportFormat::json)
    write_text(path, render_json(to_json(results), ctx));
  else
    write_text(path, render_csv(results, ctx));
}

inline void emit_report(const std::vector<CvReport>& results, ReportFormat format, const std::string& path,
                        const ReportContext& ctx) {
  detail::require(!results.empty(), "emit_report: no results");
  if (format == ReportFormat::json) {
    Json arr = Json::array();
    for (const auto& r : results) arr.push_back(to_json(r));
    write_text(path, render_json(arr, ctx));
  } else {
    write_text(path, render_csv(results, ctx));
  }
}

// ---------------------------------------------------------------------------
// mm2 spec files:
//   {"marginal": {"kind": "uniform", "dim": 1},
//    "eta": [{"lo": [0], "hi": [0.5], "p": 0.9}, {"lo": [0.5], "hi": [1], "p": 0.1}]}
// Bounds may be the strings "inf" / "-inf". An empirical marginal lists its
// support under "marginal.points".

namespace detail {

inline double bound_from_json(const Json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw format_error("mm2 spec: bound must be a number or \"inf\"/\"-inf\"");
}

inline Json bound_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? Json("inf") : Json("-inf");
  return v;
}

}  // namespace detail

inline Mm2Spec mm2_from_json(const Json& j) {
  try {
    Mm2Spec spec;
    const auto& m = j.at("marginal");
    spec.marginal.kind = parse_marginal(m.at("kind").get<std::string>());
    spec.marginal.dim = m.at("dim").get<std::size_t>();
    if (m.contains("points")) spec.marginal.points = m.at("points").get<std::vector<Point>>();
    for (const auto& r : j.at("eta")) {
      EtaRegion reg;
      for (const auto& v : r.at("lo")) reg.lo.push_back(detail::bound_from_json(v));
      for (const auto& v : r.at("hi")) reg.hi.push_back(detail::bound_from_json(v));
      reg.p = r.at("p").get<double>();
      spec.eta.push_back(std::move(reg));
    }
    validate(spec);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw format_error(std::string("mm2 spec: ") + e.what());
  }
}

inline Json mm2_to_json(const Mm2Spec& spec) {
  Json j;
  j["marginal"]["kind"] = to_string(spec.marginal.kind);
  j["marginal"]["dim"] = spec.marginal.dim;
  if (!spec.marginal.points.empty()) j["marginal"]["points"] = spec.marginal.points;
  j["eta"] = Json::array();
  for (const auto& r : spec.eta) {
    Json reg;
    reg["lo"] = Json::array();
    reg["hi"] = Json::array();
    for (double v : r.lo) reg["lo"].push_back(detail::bound_to_json(v));
    for (double v : r.hi) reg["hi"].push_back(detail::bound_to_json(v));
    reg["p"] = r.p;
    j["eta"].push_back(std::move(reg));
  }
  return j;
}

inline Mm2Spec load_mm2_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw format_error("cannot open spec '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw format_error("spec '" + path + "': " + e.what());
  }
  return mm2_from_json(j);
}

}  // namespace borelknn
