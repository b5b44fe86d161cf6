// borelknn: one binary, six subcommands. Each subcommand resolves its options,
// runs the library, writes its report under --output-dir and prints a JSON
// summary on standard output. All randomness flows from --seed.

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "borelknn/borelknn.hpp"

namespace {

using namespace borelknn;
namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Global {
  std::uint64_t seed = 20240601;
  std::size_t threads = 1;
  int verbosity = 1;
  std::string output_dir = ".";
  std::string format = "csv";
  // Set when a report went to standard output; the summary then goes to stderr.
  bool stdout_taken = false;

  Seed master() const { return Seed{seed}; }
  ReportFormat report_format() const { return parse_report_format(format); }
};

void note(const Global& g, const std::string& msg) {
  if (g.verbosity >= 1) std::cerr << "borelknn: " << msg << '\n';
}

std::string resolve(const Global& g, const std::string& path) {
  if (path == "-" || fs::path(path).is_absolute()) return path;
  fs::path full = fs::path(g.output_dir) / path;
  if (full.has_parent_path()) fs::create_directories(full.parent_path());
  return full.string();
}

void emit(Global& g, const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    g.stdout_taken = true;
    return;
  }
  write_text(path, text);
  note(g, "wrote " + path);
}

void summary(const Global& g, const Json& j) { (g.stdout_taken ? std::cerr : std::cout) << j.dump(2) << '\n'; }

// Only options that change results go into the recorded config, so reports
// stay byte-identical across thread counts.
ReportContext context(const Global& g, const std::string& command, Json config) {
  return {command, g.seed, std::move(config)};
}

// Report text in the chosen format: CSV rows (with the usual comment header)
// or the JSON document around `json`.
std::string render(const Global& g, const ReportContext& ctx, const Json& json,
                   const std::function<void(std::ostream&)>& csv_rows) {
  if (g.report_format() == ReportFormat::json) return render_json(json, ctx);
  std::ostringstream out;
  detail::csv_header(out, ctx);
  csv_rows(out);
  return out.str();
}

// ---------------------------------------------------------------------------
// Input files

/// Numeric columns of a CSV; `label` is skipped when present.
std::vector<Point> load_features(const std::string& path, const std::string& label) {
  std::ifstream in(path);
  if (!in) throw format_error("csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw format_error(path + ": missing header row");
  auto header = detail::split_commas(line);
  std::size_t skip = header.size();
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] == label) skip = c;
  std::vector<Point> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto cells = detail::split_commas(line);
    if (cells.size() != header.size())
      throw format_error(path + ": line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                         " columns, header has " + std::to_string(header.size()));
    Point p;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == skip) continue;
      auto v = detail::parse_double(cells[c]);
      if (!v || !std::isfinite(*v))
        throw format_error(path + ": line " + std::to_string(line_no) + ", column '" + std::string(header[c]) +
                           "': bad value '" + std::string(cells[c]) + "'");
      p.push_back(*v);
    }
    out.push_back(std::move(p));
  }
  if (out.empty()) throw format_error(path + ": no data rows");
  return out;
}

// Reduced files: a "# borelknn-reduced {json}" line carrying (d, B, g) and the
// scaling, then a CSV of decimal codes (one column per group) and the label.
constexpr std::string_view reduced_tag = "# borelknn-reduced ";

struct ReducedMeta {
  std::size_t dim = 0;
  unsigned bits = 0;
  std::size_t group_size = 0;
};

struct Table {
  LabeledDataset data;
  std::optional<ReducedMeta> reduced;
};

std::size_t group_count(std::size_t d, std::size_t g) { return (d + g - 1) / g; }

Table load_reduced(std::istream& in, const std::string& path, const std::string& first, const std::string& label) {
  Json meta;
  try {
    meta = Json::parse(first.substr(reduced_tag.size()));
  } catch (const nlohmann::json::exception& e) {
    throw format_error(path + ": bad reduced-file header: " + e.what());
  }
  ReducedMeta m{meta.at("dim").get<std::size_t>(), meta.at("bits").get<unsigned>(),
                meta.at("group_size").get<std::size_t>()};
  if (m.dim == 0 || m.group_size == 0 || m.group_size > m.dim || m.bits == 0 || m.bits > max_bits_per_coordinate)
    throw format_error(path + ": inconsistent reduced-file header");
  const std::size_t groups = group_count(m.dim, m.group_size);

  std::string line;
  if (!std::getline(in, line)) throw format_error(path + ": missing column header");
  auto header = detail::split_commas(line);
  auto it = std::find(header.begin(), header.end(), label);
  if (it == header.end()) throw format_error(path + ": no column named '" + label + "'");
  const auto label_col = static_cast<std::size_t>(it - header.begin());
  if (header.size() != groups + 1) throw format_error(path + ": expected " + std::to_string(groups) + " code columns");

  std::vector<Point> points;
  std::vector<Label> labels;
  std::vector<std::string> names;
  std::map<std::string, Label> ids;
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto cells = detail::split_commas(line);
    if (cells.size() != header.size())
      throw format_error(path + ": line " + std::to_string(line_no) + " has the wrong number of columns");
    Point p;
    std::size_t group = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == label_col) continue;
      const auto dim = static_cast<std::uint32_t>(std::min(m.group_size, m.dim - group * m.group_size));
      try {
        auto x = borel_inverse(from_decimal(std::string(cells[c]), dim, m.bits));
        p.insert(p.end(), x.begin(), x.end());
      } catch (const invalid_argument& e) {
        throw format_error(path + ": line " + std::to_string(line_no) + ": " + e.what());
      }
      ++group;
    }
    std::string text(cells[label_col]);
    auto [pos, fresh] = ids.emplace(text, static_cast<Label>(names.size()));
    if (fresh) names.push_back(text);
    points.push_back(std::move(p));
    labels.push_back(pos->second);
  }
  if (points.empty()) throw format_error(path + ": no data rows");
  const std::size_t classes = names.size();
  return {LabeledDataset(std::move(points), std::move(labels), classes, std::move(names)), m};
}

/// A labelled CSV, either raw or written by `reduce`.
Table load_table(const std::string& path, const std::string& label) {
  std::ifstream in(path);
  if (!in) throw format_error("csv: cannot open '" + path + "'");
  std::string first;
  std::getline(in, first);
  if (first.rfind(reduced_tag, 0) == 0) return load_reduced(in, path, first, label);
  return {load_csv(path, label), std::nullopt};
}

Json scale_json(const MinMaxParams& s) { return Json{{"min", s.min}, {"max", s.max}}; }

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

std::vector<Point> gaussian_points(std::size_t n, std::size_t d, Seed seed) {
  SplitMix64 gen(seed);
  std::vector<Point> pts(n, Point(d));
  for (auto& x : pts)
    for (double& v : x) v = gen.normal();
  return pts;
}

// ---------------------------------------------------------------------------
// Subcommands

struct ReduceArgs {
  std::string input, label = "class", output = "reduced.csv";
  unsigned bits = 16;
  std::size_t group_size = 0;
};

int run_reduce(Global& g, const ReduceArgs& a) {
  auto ds = load_csv(a.input, a.label);
  if (a.group_size > ds.dim()) throw UsageError("--group-size exceeds the dimension " + std::to_string(ds.dim()));
  const ReductionConfig cfg{a.bits, a.group_size};
  const std::size_t gsize = cfg.effective_group(ds.dim());
  auto [unit, scale] = normalize_unit_cube(ds);

  Json meta{{"dim", ds.dim()}, {"bits", a.bits}, {"group_size", gsize}, {"label", a.label}, {"scale", scale_json(scale)}};
  std::ostringstream out;
  out << reduced_tag << meta.dump() << '\n';
  const std::size_t groups = group_count(ds.dim(), gsize);
  for (std::size_t j = 0; j < groups; ++j) out << "code_" << j << ',';
  out << a.label << '\n';
  for (std::size_t i = 0; i < unit.size(); ++i) {
    for (const auto& code : grouped_reduce(clamp_unit_cube(unit.point(i)), cfg)) out << to_decimal(code) << ',';
    out << ds.class_names()[ds.label(i)] << '\n';
  }
  const std::string path = resolve(g, a.output);
  emit(g, path, out.str());
  summary(g, Json{{"command", "reduce"}, {"n", ds.size()}, {"d", ds.dim()}, {"bits", a.bits},
                  {"group_size", gsize}, {"groups", groups}, {"output", path}});
  return 0;
}

struct ClassifyArgs {
  std::string train, test, label = "class", metric = "euclidean", out = "predictions.csv";
  std::size_t k = 0;
  unsigned bits = 16;
  std::size_t group_size = 0;
};

int run_classify(Global& g, const ClassifyArgs& a) {
  const auto train_raw = load_csv(a.train, a.label);
  std::map<std::string, Label> class_map;
  for (std::size_t c = 0; c < train_raw.class_count(); ++c)
    class_map.emplace(train_raw.class_names()[c], static_cast<Label>(c));
  const auto test_raw = load_csv(a.test, a.label, class_map);
  if (test_raw.dim() != train_raw.dim()) throw UsageError("train and test files differ in dimension");

  const MinMaxParams scale = fit_min_max(train_raw);
  TrainingSet<Point> train;
  for (const auto& x : train_raw.points()) train.samples.push_back(clamp_unit_cube(apply_min_max(x, scale)));
  train.labels = train_raw.labels();
  train.class_count = train_raw.class_count();

  const std::size_t k = a.k == 0 ? detail::scheduled_k(sqrt_schedule(), train.size()) : a.k;
  if (k > train.size()) throw UsageError("--k exceeds the training size " + std::to_string(train.size()));
  const Seed seed = g.master();
  LearningRule<Point> rule;
  if (a.metric == "euclidean") {
    rule = make_brute_rule<EuclideanMetric>(constant_schedule(k), seed);
  } else {
    const ReductionConfig cfg{a.bits, a.group_size};
    if (a.group_size > train_raw.dim()) throw UsageError("--group-size exceeds the dimension");
    if (cfg.effective_group(train_raw.dim()) == train_raw.dim())
      rule = transport_rule<Point, BorelCode>(make_sorted1d_rule(constant_schedule(k), seed),
                                              [cfg](const Point& x) { return borel_map(x, cfg.bits); });
    else
      rule = transport_rule<Point, std::vector<BorelCode>>(
          make_brute_rule<GroupedReducedMetric>(constant_schedule(k), seed),
          [cfg](const Point& x) { return grouped_reduce(x, cfg); });
  }
  const auto clf = rule(train);

  std::vector<Label> predicted(test_raw.size());
  parallel_for(test_raw.size(), g.threads, [&](std::size_t i) {
    predicted[i] = clf.predict(clamp_unit_cube(apply_min_max(test_raw.point(i), scale)), i);
  });
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) wrong += predicted[i] != test_raw.label(i);
  const double error = static_cast<double>(wrong) / static_cast<double>(predicted.size());

  const auto& names = train_raw.class_names();
  Json config{{"train", a.train}, {"test", a.test}, {"label", a.label}, {"metric", a.metric}, {"k", k}};
  if (a.metric == "reduced") {
    config["bits"] = a.bits;
    config["group_size"] = ReductionConfig{a.bits, a.group_size}.effective_group(train_raw.dim());
  }
  const auto ctx = context(g, "classify", config);
  Json rows = Json::array();
  for (std::size_t i = 0; i < predicted.size(); ++i)
    rows.push_back(Json{{"row", i}, {"label", names[test_raw.label(i)]}, {"predicted", names[predicted[i]]}});
  const std::string path = resolve(g, a.out);
  emit(g, path, render(g, ctx, Json{{"n", predicted.size()}, {"k", k}, {"error", error}, {"predictions", rows}},
                       [&](std::ostream& out) {
                         out << "row,label,predicted\n";
                         for (std::size_t i = 0; i < predicted.size(); ++i)
                           out << i << ',' << names[test_raw.label(i)] << ',' << names[predicted[i]] << '\n';
                       }));
  summary(g, Json{{"command", "classify"}, {"n", predicted.size()}, {"k", k}, {"error", error}, {"output", path}});
  return 0;
}

struct AnnArgs {
  bool build = false, query = false, audit = false;
  std::string input, queries, label = "class", index_in, index_out, out = "neighbors.csv";
  unsigned levels = 16;
  std::size_t k = 10;
  bool k_given = false;
  AnnParams params;
};

int run_ann(Global& g, const AnnArgs& a) {
  if (!a.build && !a.query && !a.audit) throw UsageError("ann needs --build, --query or --audit");
  if (a.build && a.input.empty()) throw UsageError("ann --build needs --input");
  if (!a.build && a.index_in.empty()) throw UsageError("ann --query needs --index-in or --build");
  if ((a.query || a.audit) && a.queries.empty()) throw UsageError("ann --query needs --queries");

  Json out_summary{{"command", "ann"}};
  AnnIndex index;
  if (a.build) {
    auto raw = load_features(a.input, a.label);
    LabeledDataset ds(raw, std::vector<Label>(raw.size(), 0), 1);
    auto [unit, scale] = normalize_unit_cube(ds);
    std::vector<BitString> codes;
    codes.reserve(unit.size());
    for (const auto& x : unit.points()) codes.push_back(thermometer_encode(x, a.levels));
    index = build_ann_index(std::move(codes), a.params, a.k, rng::derive(g.master(), rng::tag_projection), g.threads);
    index.set_encoder(EncoderInfo{a.levels, scale});
    Json b{{"n", index.size()}, {"D", index.dim()}, {"k", index.k()}, {"cols", index.cols()},
           {"repeats", index.repeats()}, {"epsilon", index.params().epsilon}, {"digest", hex64(index.digest())}};
    if (!a.index_out.empty()) {
      const std::string path = resolve(g, a.index_out);
      index.save(path);
      note(g, "wrote " + path);
      b["index"] = path;
    }
    out_summary["build"] = b;
  } else {
    index = AnnIndex::load(a.index_in);
  }

  if (a.query || a.audit) {
    const auto& enc = index.encoder();
    if (enc.levels == 0) throw UsageError("index carries no real-vector encoder; queries cannot be encoded");
    const std::size_t k = a.k_given || a.build ? a.k : index.k();
    auto raw = load_features(a.queries, a.label);
    std::vector<BitString> qs;
    for (const auto& x : raw) {
      if (x.size() != enc.scale.min.size())
        throw UsageError("query dimension " + std::to_string(x.size()) + " differs from the index's " +
                         std::to_string(enc.scale.min.size()));
      qs.push_back(thermometer_encode(clamp_unit_cube(apply_min_max(x, enc.scale)), enc.levels));
    }
    std::vector<NeighborSet> found(qs.size());
    std::vector<char> good(qs.size(), 0);
    parallel_for(qs.size(), g.threads, [&](std::size_t i) {
      found[i] = kann_query(index, qs[i], k, query_seed(g.master(), i));
      if (!a.audit) return;
      const double bound = (1.0 + index.params().c) * eps_knn<HammingMetric>(index.data(), qs[i], k);
      bool ok = found[i].size() == k;
      for (double dist : found[i].distances) ok = ok && dist <= bound;
      good[i] = ok;
    });
    Json q{{"queries", qs.size()}, {"k", k}};
    if (a.audit) {
      const auto hits = static_cast<std::size_t>(std::count(good.begin(), good.end(), 1));
      q["contract_satisfied"] = hits;
      q["contract_rate"] = static_cast<double>(hits) / static_cast<double>(qs.size());
    }
    Json config{{"queries", a.queries}, {"k", k}, {"c", index.params().c}, {"epsilon", index.params().epsilon},
                {"delta", index.params().delta}, {"repeats", index.repeats()}, {"const_c", index.params().const_c},
                {"levels", enc.levels}, {"index_digest", hex64(index.digest())}};
    const auto ctx = context(g, "ann", config);
    Json rows = Json::array();
    for (std::size_t i = 0; i < found.size(); ++i)
      rows.push_back(Json{{"query", i}, {"indices", found[i].indices}, {"distances", found[i].distances}});
    const std::string path = resolve(g, a.out);
    emit(g, path, render(g, ctx, Json{{"summary", q}, {"neighbors", rows}}, [&](std::ostream& out) {
           out << "query,rank,index,distance\n";
           for (std::size_t i = 0; i < found.size(); ++i)
             for (std::size_t r = 0; r < found[i].size(); ++r)
               out << i << ',' << r + 1 << ',' << found[i].indices[r] << ',' << detail::fmt(found[i].distances[r])
                   << '\n';
         }));
    q["output"] = path;
    out_summary["query"] = q;
  }
  summary(g, out_summary);
  return 0;
}

struct InstabilityArgs {
  std::string dist = "gaussian", input, label = "class", out = "profile.csv";
  std::size_t d = 20, n = 2000, queries = 500, k = 20, grid = default_radius_grid;
  double c = 0.5;
};

int run_instability(Global& g, const InstabilityArgs& a) {
  InstabilityProfile p;
  Json config{{"dist", a.dist}, {"k", a.k}, {"c", a.c}, {"grid", a.grid}};
  std::size_t n = a.n, d = a.d;
  if (a.dist == "gaussian") {
    auto data = gaussian_points(a.n, a.d, rng::derive(g.master(), rng::tag_sample_x));
    auto qs = gaussian_points(a.queries, a.d, rng::derive(g.master(), rng::tag_sample_y));
    if (a.k > a.n) throw UsageError("--k exceeds --n");
    p = instability_profile<EuclideanMetric>(data, qs, a.k, a.c, a.grid, g.threads);
    config["n"] = a.n;
    config["d"] = a.d;
    config["queries"] = a.queries;
  } else {
    if (a.input.empty()) throw UsageError("--dist csv needs --input");
    auto ds = normalize_unit_cube(load_csv(a.input, a.label)).first;
    n = ds.size();
    d = ds.dim();
    if (a.k >= n) throw UsageError("--k must be below the dataset size " + std::to_string(n));
    p = instability_profile_loo<EuclideanMetric>(ds.points(), a.k, a.c, a.grid, g.threads);
    config["input"] = a.input;
    config["label"] = a.label;
  }
  const auto ctx = context(g, "instability", config);
  const std::string path = resolve(g, a.out);
  emit(g, path, g.report_format() == ReportFormat::json ? render_json(to_json(p), ctx) : render_csv(p, ctx));
  summary(g, Json{{"command", "instability"}, {"dist", a.dist}, {"n", n}, {"d", d}, {"k", a.k}, {"c", a.c},
                  {"queries", p.queries.size()}, {"mean_knn_radius", p.mean_eps_knn},
                  {"mean_inflated_count", p.mean_inflated_count}, {"unstable_fraction", p.unstable_fraction},
                  {"output", path}});
  return 0;
}

struct CvArgs {
  std::string input, label = "class", variant = "both", out = "cv.csv";
  std::size_t folds = 10, k_max = 20, group_size = 0;
  unsigned bits = 16;
  bool strict = false;
};

int run_cv_command(Global& g, const CvArgs& a) {
  auto table = load_table(a.input, a.label);
  std::vector<CvVariant> variants;
  if (a.variant == "both")
    variants = {CvVariant::original, CvVariant::reduced};
  else
    variants = {parse_cv_variant(a.variant)};

  CvOptions opt;
  opt.k_max = a.k_max;
  opt.folds = a.folds;
  opt.strict = a.strict;
  opt.threads = g.threads;
  opt.reduction = ReductionConfig{a.bits, a.group_size};
  Json config{{"input", a.input}, {"label", a.label}, {"folds", a.folds}, {"k_max", a.k_max}, {"variant", a.variant}};
  if (table.reduced) {
    // The codes fix the lattice already; decoding and re-encoding is exact.
    if (a.variant != "reduced") throw UsageError("a reduced input supports only --variant reduced");
    if (a.strict) throw UsageError("--strict does not apply to a reduced input");
    opt.rescale = false;
    opt.reduction = ReductionConfig{table.reduced->bits, table.reduced->group_size};
    config["reduced_input"] = true;
  }
  config["bits"] = opt.reduction.bits;
  config["group_size"] = opt.reduction.effective_group(table.data.dim());
  config["strict"] = a.strict;

  std::vector<CvReport> reports;
  for (auto v : variants) {
    opt.variant = v;
    reports.push_back(run_cv(table.data, opt, g.master()));
  }
  const auto ctx = context(g, "cv", config);
  const std::string path = resolve(g, a.out);
  if (path == "-") {
    std::cout << (g.report_format() == ReportFormat::json ? [&] {
      Json arr = Json::array();
      for (const auto& r : reports) arr.push_back(to_json(r));
      return render_json(arr, ctx);
    }()
                                                        : render_csv(reports, ctx));
    g.stdout_taken = true;
  } else {
    emit_report(reports, g.report_format(), path, ctx);
    note(g, "wrote " + path);
  }
  Json s = Json::array();
  for (const auto& r : reports)
    s.push_back(Json{{"variant", to_string(r.variant)}, {"best_k", r.best_k}, {"best_accuracy", r.best_accuracy()},
                     {"correctly_classified", r.best_correct()}, {"incorrectly_classified", r.best_incorrect()}});
  summary(g, Json{{"command", "cv"}, {"n", table.data.size()}, {"results", s}, {"output", path}});
  return 0;
}

struct ConsistencyArgs {
  std::string spec = "step", rule = "knn", out = "consistency.csv";
  std::vector<std::size_t> n_grid{100, 400, 1600, 6400};
  std::size_t trials = 5, k = 0, test_size = default_test_size;
  std::optional<double> c;
  unsigned bits = 16, levels = 16;
  Label bias = 1;
};

int run_consistency_command(Global& g, const ConsistencyArgs& a) {
  const Mm2Spec spec = a.spec == "step" ? step_spec() : load_mm2_spec(a.spec);
  RuleOptions opt;
  opt.source = parse_neighbor_source(a.rule);
  opt.bits = a.bits;
  opt.levels = a.levels;
  opt.bias = a.bias;
  opt.threads = 1;
  if (a.c) {
    opt.ann.c = *a.c;
    opt.adversary_c = *a.c;
  }
  const KSchedule schedule = a.k == 0 ? sqrt_schedule() : constant_schedule(a.k);
  const auto rule = make_knn_rule(opt, schedule, rng::derive(g.master(), rng::tag_neighbor_ties));
  const auto curve = run_consistency(spec, rule, a.n_grid, a.trials, g.master(), a.test_size, g.threads);

  Json config{{"spec", a.spec == "step" ? Json("step") : mm2_to_json(spec)},
              {"rule", a.rule},
              {"k", a.k == 0 ? Json("sqrt") : Json(a.k)},
              {"trials", a.trials},
              {"test_size", a.test_size}};
  if (opt.source == NeighborSource::sorted1d) config["bits"] = a.bits;
  if (opt.source == NeighborSource::kann) {
    config["levels"] = a.levels;
    config["c"] = opt.ann.c;
  }
  if (opt.source == NeighborSource::adversarial) {
    config["c"] = opt.adversary_c;
    config["bias"] = a.bias;
  }
  const auto ctx = context(g, "consistency", config);
  const std::string path = resolve(g, a.out);
  emit(g, path, g.report_format() == ReportFormat::json ? render_json(to_json(curve), ctx) : render_csv(curve, ctx));
  summary(g, Json{{"command", "consistency"}, {"rule", a.rule}, {"bayes_error", curve.bayes},
                  {"n_grid", curve.n_grid}, {"mean_error", curve.mean_error}, {"mean_excess", curve.mean_excess},
                  {"output", path}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"k-NN learning through Borel isomorphisms and Hamming-cube k-ANN", "borelknn"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(version));
  app.set_config("--config", "", "TOML/INI file of option values (flags take precedence)");

  Global g;
  app.add_option("--seed", g.seed, "Master seed")->envname("BORELKNN_SEED")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)")
      ->envname("BORELKNN_THREADS")
      ->capture_default_str();
  app.add_option("--verbosity", g.verbosity, "0 = quiet, 1 = notes on stderr")
      ->envname("BORELKNN_VERBOSITY")
      ->check(CLI::Range(0, 3))
      ->capture_default_str();
  app.add_option("--output-dir", g.output_dir, "Directory for relative output paths")
      ->envname("BORELKNN_OUTPUT_DIR")
      ->capture_default_str();
  app.add_option("--format", g.format, "Report format")
      ->envname("BORELKNN_FORMAT")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  const auto bits_range = CLI::Range(1u, max_bits_per_coordinate);

  ReduceArgs red;
  auto* reduce = app.add_subcommand("reduce", "Write the Borel codes of a CSV's points");
  reduce->add_option("--input", red.input, "Labelled CSV")->required()->check(CLI::ExistingFile);
  reduce->add_option("--label", red.label, "Label column")->capture_default_str();
  reduce->add_option("--bits", red.bits, "Bits per coordinate")->check(bits_range)->capture_default_str();
  reduce->add_option("--group-size", red.group_size, "Coordinates per code (0 = all)")->capture_default_str();
  reduce->add_option("--output", red.output, "Reduced CSV ('-' for stdout)")->capture_default_str();

  ClassifyArgs cls;
  auto* classify = app.add_subcommand("classify", "Predict labels of a test CSV with k-NN");
  classify->add_option("--train", cls.train, "Training CSV")->required()->check(CLI::ExistingFile);
  classify->add_option("--test", cls.test, "Test CSV")->required()->check(CLI::ExistingFile);
  classify->add_option("--label", cls.label, "Label column")->capture_default_str();
  classify->add_option("--k", cls.k, "Neighbours (0 = ceil(sqrt(n)))")->capture_default_str();
  classify->add_option("--metric", cls.metric, "Distance")
      ->check(CLI::IsMember({"euclidean", "reduced"}))
      ->capture_default_str();
  classify->add_option("--bits", cls.bits, "Bits per coordinate (reduced)")->check(bits_range)->capture_default_str();
  classify->add_option("--group-size", cls.group_size, "Coordinates per code (0 = all)")->capture_default_str();
  classify->add_option("--out", cls.out, "Predictions file")->capture_default_str();

  AnnArgs ann;
  auto* annc = app.add_subcommand("ann", "Build, query and audit the Hamming-cube k-ANN index");
  annc->add_flag("--build", ann.build, "Build an index from --input");
  annc->add_flag("--query", ann.query, "Answer the queries in --queries");
  annc->add_flag("--audit", ann.audit, "Check answers against brute force (implies --query)");
  annc->add_option("--input", ann.input, "Data CSV for --build")->check(CLI::ExistingFile);
  annc->add_option("--queries", ann.queries, "Query CSV")->check(CLI::ExistingFile);
  annc->add_option("--label", ann.label, "Column to ignore if present")->capture_default_str();
  annc->add_option("--bits,--levels", ann.levels, "Thermometer levels per coordinate")
      ->check(CLI::Range(1u, 4096u))
      ->capture_default_str();
  auto* ann_k = annc->add_option("--k", ann.k, "Neighbours per query")->check(CLI::PositiveNumber)->capture_default_str();
  annc->add_option("--c", ann.params.c, "Approximation factor")->check(CLI::PositiveNumber)->capture_default_str();
  annc->add_option("--epsilon", ann.params.epsilon, "Projection distortion (0 = c/4)")->capture_default_str();
  annc->add_option("--delta", ann.params.delta, "Failure probability")->capture_default_str();
  annc->add_option("--const-C", ann.params.const_c, "Constant of the target dimension")->capture_default_str();
  annc->add_option("--repeats", ann.params.repeats, "Draws per range (0 = ceil(log2(1/delta)))")->capture_default_str();
  annc->add_option("--index-out", ann.index_out, "Write the built index here");
  annc->add_option("--index-in", ann.index_in, "Read a stored index")->check(CLI::ExistingFile);
  annc->add_option("--out", ann.out, "Neighbour list file")->capture_default_str();

  InstabilityArgs ins;
  auto* instab = app.add_subcommand("instability", "Neighbour-count profile of inflated k-NN balls");
  instab->add_option("--dist", ins.dist, "Data source")->check(CLI::IsMember({"gaussian", "csv"}))->capture_default_str();
  instab->add_option("--d", ins.d, "Dimension (gaussian)")->check(CLI::PositiveNumber)->capture_default_str();
  instab->add_option("--n", ins.n, "Datapoints (gaussian)")->check(CLI::PositiveNumber)->capture_default_str();
  instab->add_option("--queries", ins.queries, "Queries (gaussian)")->check(CLI::PositiveNumber)->capture_default_str();
  instab->add_option("--k", ins.k, "Neighbours")->check(CLI::PositiveNumber)->capture_default_str();
  instab->add_option("--c", ins.c, "Slack")->check(CLI::NonNegativeNumber)->capture_default_str();
  instab->add_option("--grid", ins.grid, "Radii in the profile")->capture_default_str();
  instab->add_option("--input", ins.input, "CSV for --dist csv (leave-one-out)")->check(CLI::ExistingFile);
  instab->add_option("--label", ins.label, "Label column")->capture_default_str();
  instab->add_option("--out", ins.out, "Profile file")->capture_default_str();

  CvArgs cva;
  auto* cv = app.add_subcommand("cv", "Cross-validated accuracy for k = 1..kmax");
  cv->add_option("--input", cva.input, "Labelled CSV, raw or from reduce")->required()->check(CLI::ExistingFile);
  cv->add_option("--label", cva.label, "Label column")->capture_default_str();
  cv->add_option("--folds", cva.folds, "Folds")->check(CLI::Range(2, 1000000))->capture_default_str();
  cv->add_option("--kmax", cva.k_max, "Largest k")->check(CLI::PositiveNumber)->capture_default_str();
  cv->add_option("--variant", cva.variant, "Space")
      ->check(CLI::IsMember({"original", "reduced", "both"}))
      ->capture_default_str();
  cv->add_option("--bits", cva.bits, "Bits per coordinate")->check(bits_range)->capture_default_str();
  cv->add_option("--group-size", cva.group_size, "Coordinates per code (0 = all)")->capture_default_str();
  cv->add_flag("--strict", cva.strict, "Fit scaling on each training fold");
  cv->add_option("--out", cva.out, "Report file")->capture_default_str();

  ConsistencyArgs con;
  auto* consist = app.add_subcommand("consistency", "Error-versus-n curve of a rule on an mm2 spec");
  consist->add_option("--spec", con.spec, "Spec JSON file, or 'step'")->capture_default_str();
  consist->add_option("--rule", con.rule, "Neighbour source")
      ->check(CLI::IsMember({"knn", "brute", "reduced", "sorted1d", "kann", "adversarial"}))
      ->capture_default_str();
  consist->add_option("--n-grid", con.n_grid, "Training sizes, increasing")->delimiter(',')->capture_default_str();
  consist->add_option("--trials", con.trials, "Trials per size")->check(CLI::PositiveNumber)->capture_default_str();
  consist->add_option("--k", con.k, "Neighbours (0 = ceil(sqrt(n)))")->capture_default_str();
  consist->add_option("--c", con.c, "Slack of kann or adversarial (defaults 0.5 and 0.2)")
      ->check(CLI::NonNegativeNumber);
  consist->add_option("--test-size", con.test_size, "Test points per trial")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  consist->add_option("--bits", con.bits, "Bits per coordinate (reduced)")->check(bits_range)->capture_default_str();
  consist->add_option("--levels", con.levels, "Thermometer levels (kann)")->capture_default_str();
  consist->add_option("--bias", con.bias, "Label the adversary favours")->capture_default_str();
  consist->add_option("--out", con.out, "Curve file")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 1;
  }
  ann.k_given = ann_k->count() > 0;
  if (ann.audit) ann.query = true;

  CLI::App* active = app.get_subcommands().front();
  try {
    if (active == reduce) return run_reduce(g, red);
    if (active == classify) return run_classify(g, cls);
    if (active == annc) return run_ann(g, ann);
    if (active == instab) return run_instability(g, ins);
    if (active == cv) return run_cv_command(g, cva);
    return run_consistency_command(g, con);
  } catch (const UsageError& e) {
    std::cerr << "borelknn " << active->get_name() << ": " << e.what() << "\n\n" << active->help();
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "borelknn " << active->get_name() << ": error: " << e.what() << '\n';
    return 2;
  }
}
