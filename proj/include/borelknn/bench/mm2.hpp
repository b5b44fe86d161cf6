#pragma once

// Synthetic binary problems with a known regression function: a marginal law
// on the domain and eta(x) = P(Y = 1 | X = x), constant on axis-aligned boxes.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "borelknn/core/dataset.hpp"
#include "borelknn/core/error.hpp"
#include "borelknn/core/random.hpp"

namespace borelknn {

enum class MarginalKind { uniform, gaussian, empirical };

inline const char* to_string(MarginalKind m) {
  switch (m) {
    case MarginalKind::uniform: return "uniform";
    case MarginalKind::gaussian: return "gaussian";
    case MarginalKind::empirical: return "empirical";
  }
  return "?";
}

inline MarginalKind parse_marginal(const std::string& text) {
  if (text == "uniform") return MarginalKind::uniform;
  if (text == "gaussian") return MarginalKind::gaussian;
  if (text == "empirical") return MarginalKind::empirical;
  detail::fail("unknown marginal '" + text + "'");
}

struct Marginal {
  MarginalKind kind = MarginalKind::uniform;
  std::size_t dim = 1;
  /// Support points of the empirical marginal, drawn uniformly with replacement.
  std::vector<Point> points;
};

/// Box [lo, hi) with eta = p inside. An upper face on the edge of the
/// marginal's support is closed.
struct EtaRegion {
  Point lo;
  Point hi;
  double p = 0.0;
};

struct Mm2Spec {
  Marginal marginal;
  std::vector<EtaRegion> eta;
};

/// Uniform marginal on [0,1], eta = 0.9 on [0, 0.5) and 0.1 on [0.5, 1].
inline Mm2Spec step_spec() {
  return {{MarginalKind::uniform, 1, {}}, {{{0.0}, {0.5}, 0.9}, {{0.5}, {1.0}, 0.1}}};
}

/// eta equal to p everywhere on the support.
inline Mm2Spec constant_spec(std::size_t dim, double p, MarginalKind kind = MarginalKind::uniform) {
  const double inf = std::numeric_limits<double>::infinity();
  const double lo = kind == MarginalKind::uniform ? 0.0 : -inf;
  const double hi = kind == MarginalKind::uniform ? 1.0 : inf;
  return {{kind, dim, {}}, {{Point(dim, lo), Point(dim, hi), p}}};
}

namespace detail {

inline double support_upper(const Marginal& m, std::size_t axis) {
  switch (m.kind) {
    case MarginalKind::uniform: return 1.0;
    case MarginalKind::gaussian: return std::numeric_limits<double>::infinity();
    case MarginalKind::empirical: {
      double top = -std::numeric_limits<double>::infinity();
      for (const auto& x : m.points) top = std::max(top, x[axis]);
      return top;
    }
  }
  return 0.0;
}

inline bool in_region(const EtaRegion& r, const Point& x, const std::vector<double>& upper) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < r.lo[i]) return false;
    if (x[i] > r.hi[i] || (x[i] == r.hi[i] && r.hi[i] < upper[i])) return false;
  }
  return true;
}

inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Marginal probability of a region.
inline double region_mass(const Marginal& m, const EtaRegion& r, const std::vector<double>& upper) {
  switch (m.kind) {
    case MarginalKind::uniform: {
      double mass = 1.0;
      for (std::size_t i = 0; i < m.dim; ++i) mass *= std::max(0.0, std::min(r.hi[i], 1.0) - std::max(r.lo[i], 0.0));
      return mass;
    }
    case MarginalKind::gaussian: {
      double mass = 1.0;
      for (std::size_t i = 0; i < m.dim; ++i)
        mass *= std::max(0.0, std_normal_cdf(r.hi[i]) - std_normal_cdf(r.lo[i]));
      return mass;
    }
    case MarginalKind::empirical: {
      std::size_t hits = 0;
      for (const auto& x : m.points) hits += in_region(r, x, upper) ? 1 : 0;
      return static_cast<double>(hits) / static_cast<double>(m.points.size());
    }
  }
  return 0.0;
}

inline bool boxes_overlap(const EtaRegion& a, const EtaRegion& b) {
  for (std::size_t i = 0; i < a.lo.size(); ++i)
    if (std::max(a.lo[i], b.lo[i]) >= std::min(a.hi[i], b.hi[i])) return false;
  return true;
}

}  // namespace detail

/// Checks shapes, eta range, and that the regions partition the support.
inline void validate(const Mm2Spec& spec) {
  const auto& m = spec.marginal;
  detail::require(m.dim >= 1, "mm2 spec: dimension must be positive");
  if (m.kind == MarginalKind::empirical) {
    detail::require(!m.points.empty(), "mm2 spec: empirical marginal has no points");
    for (const auto& x : m.points) detail::require(x.size() == m.dim, "mm2 spec: empirical point of wrong dimension");
  }
  detail::require(!spec.eta.empty(), "mm2 spec: eta has no regions");
  for (std::size_t r = 0; r < spec.eta.size(); ++r) {
    const auto& reg = spec.eta[r];
    const std::string where = "mm2 spec: eta region " + std::to_string(r);
    detail::require(reg.lo.size() == m.dim && reg.hi.size() == m.dim, where + " has wrong dimension");
    detail::require(reg.p >= 0.0 && reg.p <= 1.0, where + " has p outside [0,1]");
    for (std::size_t i = 0; i < m.dim; ++i) detail::require(reg.lo[i] < reg.hi[i], where + " is empty");
    for (std::size_t s = 0; s < r; ++s)
      detail::require(!detail::boxes_overlap(reg, spec.eta[s]), where + " overlaps region " + std::to_string(s));
  }
  std::vector<double> upper(m.dim);
  for (std::size_t i = 0; i < m.dim; ++i) upper[i] = detail::support_upper(m, i);
  double total = 0.0;
  for (const auto& reg : spec.eta) total += detail::region_mass(m, reg, upper);
  detail::require(std::abs(total - 1.0) <= 1e-9, "mm2 spec: regions cover mass " + std::to_string(total) +
                                                     " of the support instead of 1");
}

/// eta(x); throws if x lies in no region.
inline double eta_at(const Mm2Spec& spec, const Point& x) {
  std::vector<double> upper(spec.marginal.dim);
  for (std::size_t i = 0; i < upper.size(); ++i) upper[i] = detail::support_upper(spec.marginal, i);
  for (const auto& r : spec.eta)
    if (detail::in_region(r, x, upper)) return r.p;
  detail::fail("mm2: point outside every eta region");
}

/// Sum over regions of mass * min(eta, 1 - eta).
inline double bayes_error(const Mm2Spec& spec) {
  validate(spec);
  std::vector<double> upper(spec.marginal.dim);
  for (std::size_t i = 0; i < upper.size(); ++i) upper[i] = detail::support_upper(spec.marginal, i);
  double err = 0.0;
  for (const auto& r : spec.eta) err += detail::region_mass(spec.marginal, r, upper) * std::min(r.p, 1.0 - r.p);
  return err;
}

/// n i.i.d. pairs: X from the marginal, then Y ~ Bernoulli(eta(X)).
inline LabeledDataset synth_mm2(const Mm2Spec& spec, std::size_t n, Seed seed) {
  validate(spec);
  detail::require(n >= 1, "synth_mm2: n must be positive");
  const auto& m = spec.marginal;
  std::vector<double> upper(m.dim);
  for (std::size_t i = 0; i < m.dim; ++i) upper[i] = detail::support_upper(m, i);

  SplitMix64 gx(rng::derive(seed, rng::tag_sample_x));
  SplitMix64 gy(rng::derive(seed, rng::tag_sample_y));
  std::vector<Point> pts(n);
  std::vector<Label> labels(n);
  for (std::size_t j = 0; j < n; ++j) {
    Point x(m.dim);
    switch (m.kind) {
      case MarginalKind::uniform:
        for (double& v : x) v = gx.uniform();
        break;
      case MarginalKind::gaussian:
        for (double& v : x) v = gx.normal();
        break;
      case MarginalKind::empirical:
        x = m.points[gx.below(m.points.size())];
        break;
    }
    double p = -1.0;
    for (const auto& r : spec.eta)
      if (detail::in_region(r, x, upper)) {
        p = r.p;
        break;
      }
    detail::require(p >= 0.0, "synth_mm2: sampled point outside every eta region");
    labels[j] = gy.uniform() < p ? 1 : 0;
    pts[j] = std::move(x);
  }
  return LabeledDataset(std::move(pts), std::move(labels), 2, {"0", "1"});
}

}  // namespace borelknn
