#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "borelknn/core/error.hpp"

namespace borelknn {

using Point = std::vector<double>;
using Label = std::uint32_t;

/// A labelled sample: n points of a common dimension with class ids in
/// [0, class_count). `class_names` is empty unless the labels came from a
/// file, in which case it maps id -> original label text.
class LabeledDataset {
 public:
  LabeledDataset() = default;

  LabeledDataset(std::vector<Point> points, std::vector<Label> labels, std::size_t class_count,
                 std::vector<std::string> class_names = {})
      : points_(std::move(points)),
        labels_(std::move(labels)),
        class_count_(class_count),
        class_names_(std::move(class_names)) {
    detail::require(!points_.empty(), "dataset must contain at least one point");
    detail::require(points_.size() == labels_.size(), "points and labels differ in length");
    detail::require(class_count_ > 0, "class_count must be positive");
    detail::require(class_names_.empty() || class_names_.size() == class_count_,
                    "class_names must name every class");
    const std::size_t d = points_.front().size();
    for (std::size_t i = 0; i < points_.size(); ++i) {
      detail::require(points_[i].size() == d,
                      "point " + std::to_string(i) + " has dimension " +
                          std::to_string(points_[i].size()) + ", expected " + std::to_string(d));
      detail::require(labels_[i] < class_count_,
                      "label of point " + std::to_string(i) + " exceeds class_count");
    }
  }

  std::size_t size() const { return points_.size(); }
  std::size_t dim() const { return points_.front().size(); }
  std::size_t class_count() const { return class_count_; }

  const std::vector<Point>& points() const { return points_; }
  const std::vector<Label>& labels() const { return labels_; }
  const std::vector<std::string>& class_names() const { return class_names_; }
  const Point& point(std::size_t i) const { return points_[i]; }
  Label label(std::size_t i) const { return labels_[i]; }

  /// Rows `indices` in the given order, same class universe.
  LabeledDataset subset(const std::vector<std::size_t>& indices) const {
    std::vector<Point> pts;
    std::vector<Label> lbl;
    pts.reserve(indices.size());
    lbl.reserve(indices.size());
    for (std::size_t i : indices) {
      pts.push_back(points_.at(i));
      lbl.push_back(labels_.at(i));
    }
    return LabeledDataset(std::move(pts), std::move(lbl), class_count_, class_names_);
  }

 private:
  std::vector<Point> points_;
  std::vector<Label> labels_;
  std::size_t class_count_ = 0;
  std::vector<std::string> class_names_;
};

// ---------------------------------------------------------------------------
// CSV ingestion

/// Label column chosen by header name or zero-based index.
using ColumnSelector = std::variant<std::string, std::size_t>;

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      return cells;
    }
    cells.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

inline std::optional<double> parse_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace detail

/// Parses CSV text with a header row. Errors carry 1-based line numbers and
/// the offending column's header name.
inline LabeledDataset parse_csv(std::istream& in, const ColumnSelector& label_column,
                                const std::optional<std::map<std::string, Label>>& class_map = {}) {
  std::string line;
  if (!std::getline(in, line)) throw format_error("csv: missing header row");
  auto header = detail::split_commas(line);
  std::vector<std::string> names(header.begin(), header.end());

  std::size_t label_col = 0;
  if (const auto* name = std::get_if<std::string>(&label_column)) {
    auto it = std::find(names.begin(), names.end(), *name);
    if (it == names.end()) throw format_error("csv: no column named '" + *name + "'");
    label_col = static_cast<std::size_t>(it - names.begin());
  } else {
    label_col = std::get<std::size_t>(label_column);
    if (label_col >= names.size())
      throw format_error("csv: label column index " + std::to_string(label_col) +
                         " out of range for " + std::to_string(names.size()) + " columns");
  }

  std::vector<Point> points;
  std::vector<Label> labels;
  std::map<std::string, Label> ids;
  std::vector<std::string> order;
  if (class_map) {
    ids = *class_map;
    Label max_id = 0;
    for (const auto& [_, id] : ids) max_id = std::max(max_id, id);
    order.assign(ids.empty() ? 0 : max_id + 1, std::string{});
    for (const auto& [text, id] : ids) order[id] = text;
  }

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto cells = detail::split_commas(line);
    if (cells.size() != names.size())
      throw format_error("csv: line " + std::to_string(line_no) + " has " +
                         std::to_string(cells.size()) + " columns, header has " +
                         std::to_string(names.size()));
    Point p;
    p.reserve(names.size() - 1);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == label_col) continue;
      auto v = detail::parse_double(cells[c]);
      if (!v)
        throw format_error("csv: line " + std::to_string(line_no) + ", column '" + names[c] +
                           "' (" + std::to_string(c) + "): non-numeric value '" +
                           std::string(cells[c]) + "'");
      if (!std::isfinite(*v))
        throw format_error("csv: line " + std::to_string(line_no) + ", column '" + names[c] +
                           "': non-finite value");
      p.push_back(*v);
    }
    std::string text(cells[label_col]);
    auto it = ids.find(text);
    if (it == ids.end()) {
      if (class_map)
        throw format_error("csv: line " + std::to_string(line_no) + ": label '" + text +
                           "' missing from class map");
      it = ids.emplace(text, static_cast<Label>(order.size())).first;
      order.push_back(text);
    }
    points.push_back(std::move(p));
    labels.push_back(it->second);
  }
  if (points.empty()) throw format_error("csv: no data rows");
  std::size_t classes = order.size();
  return LabeledDataset(std::move(points), std::move(labels), classes, std::move(order));
}

inline LabeledDataset load_csv(const std::string& path, const ColumnSelector& label_column,
                               const std::optional<std::map<std::string, Label>>& class_map = {}) {
  std::ifstream in(path);
  if (!in) throw format_error("csv: cannot open '" + path + "'");
  try {
    return parse_csv(in, label_column, class_map);
  } catch (const format_error& e) {
    throw format_error(path + ": " + e.what());
  }
}

/// Label column given as text: all digits selects by index, else by name.
inline ColumnSelector parse_column_selector(const std::string& text) {
  if (!text.empty() && std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; }))
    return static_cast<std::size_t>(std::stoull(text));
  return text;
}

// ---------------------------------------------------------------------------
// Min-max scaling to the unit cube

struct MinMaxParams {
  std::vector<double> min;
  std::vector<double> max;
};

inline MinMaxParams fit_min_max(const LabeledDataset& ds) {
  MinMaxParams p{ds.point(0), ds.point(0)};
  for (const auto& x : ds.points())
    for (std::size_t j = 0; j < x.size(); ++j) {
      detail::require(std::isfinite(x[j]), "normalize: non-finite coordinate");
      p.min[j] = std::min(p.min[j], x[j]);
      p.max[j] = std::max(p.max[j], x[j]);
    }
  return p;
}

/// Affine map with min -> 0, max -> 1 per attribute; constant attributes map
/// to 0. Values outside the fitted range are not clamped here.
inline Point apply_min_max(const Point& x, const MinMaxParams& p) {
  detail::require(x.size() == p.min.size(), "normalize: dimension mismatch");
  Point out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    detail::require(std::isfinite(x[j]), "normalize: non-finite coordinate");
    double range = p.max[j] - p.min[j];
    out[j] = range > 0.0 ? (x[j] - p.min[j]) / range : 0.0;
  }
  return out;
}

inline std::pair<LabeledDataset, MinMaxParams> normalize_unit_cube(
    const LabeledDataset& ds, std::optional<MinMaxParams> params = std::nullopt) {
  MinMaxParams p = params ? std::move(*params) : fit_min_max(ds);
  std::vector<Point> pts;
  pts.reserve(ds.size());
  for (const auto& x : ds.points()) pts.push_back(apply_min_max(x, p));
  return {LabeledDataset(std::move(pts), ds.labels(), ds.class_count(), ds.class_names()), std::move(p)};
}

inline Point clamp_unit_cube(Point x) {
  for (double& v : x) v = std::clamp(v, 0.0, 1.0);
  return x;
}

inline LabeledDataset clamp_unit_cube(const LabeledDataset& ds) {
  std::vector<Point> pts;
  pts.reserve(ds.size());
  for (const auto& x : ds.points()) pts.push_back(clamp_unit_cube(x));
  return LabeledDataset(std::move(pts), ds.labels(), ds.class_count(), ds.class_names());
}

}  // namespace borelknn
