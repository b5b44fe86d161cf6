#pragma once

// (k, c)-approximate nearest neighbour index over the Hamming cube.
//
// For every range l in 1..D the index holds R independent Bernoulli(1/l)
// projections. Each projection has a hash table from projected codeword to
// the datapoints mapping there. A query binary-searches, per draw, for the
// smallest range whose image ball around the projected query holds k
// datapoints, pulls the k image-nearest datapoints from that draw, and
// returns the k points nearest to the query in the original cube among all
// R buckets.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "borelknn/ann/projection.hpp"
#include "borelknn/core/bitstring.hpp"
#include "borelknn/core/dataset.hpp"
#include "borelknn/core/error.hpp"
#include "borelknn/core/metric.hpp"
#include "borelknn/core/parallel.hpp"
#include "borelknn/core/random.hpp"
#include "borelknn/knn/neighbors.hpp"

namespace borelknn {

/// One projection draw and its codeword table.
class RangeTable {
 public:
  RangeTable() = default;

  RangeTable(BinaryMatrix matrix, std::span<const BitString> data) : matrix_(std::move(matrix)) {
    const std::size_t rw = matrix_.row_words();
    auto images = project_all(matrix_, data);
    std::vector<std::uint32_t> order(images.size());
    std::iota(order.begin(), order.end(), 0U);
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      return images[a].words() < images[b].words();
    });
    offsets_.push_back(0);
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      const auto& w = images[order[pos]].words();
      if (pos == 0 || w != images[order[pos - 1]].words()) {
        if (pos != 0) offsets_.push_back(static_cast<std::uint32_t>(members_.size()));
        codewords_.insert(codewords_.end(), w.begin(), w.end());
      }
      members_.push_back(order[pos]);
    }
    offsets_.push_back(static_cast<std::uint32_t>(members_.size()));
    (void)rw;
    build_lookup();
  }

  const BinaryMatrix& matrix() const { return matrix_; }
  std::size_t distinct() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t row_words() const { return matrix_.row_words(); }

  std::span<const std::uint64_t> codeword(std::size_t slot) const {
    return {codewords_.data() + slot * row_words(), row_words()};
  }
  std::span<const std::uint32_t> members(std::size_t slot) const {
    return {members_.data() + offsets_[slot], offsets_[slot + 1] - offsets_[slot]};
  }

  /// Datapoints whose projection equals `image` (empty if none).
  std::span<const std::uint32_t> lookup(const BitString& image) const {
    const std::uint64_t h = hash_words(image.words());
    auto it = std::lower_bound(lookup_.begin(), lookup_.end(), std::pair<std::uint64_t, std::uint32_t>{h, 0});
    for (; it != lookup_.end() && it->first == h; ++it) {
      auto cw = codeword(it->second);
      if (std::equal(cw.begin(), cw.end(), image.words().begin())) return members(it->second);
    }
    return {};
  }

  /// Hamming distance from `image` to every distinct codeword.
  std::vector<std::size_t> image_distances(const BitString& image) const {
    std::vector<std::size_t> out(distinct());
    const std::uint64_t* q = image.words().data();
    const std::size_t rw = row_words();
    for (std::size_t s = 0; s < out.size(); ++s) {
      const std::uint64_t* cw = codewords_.data() + s * rw;
      std::size_t d = 0;
      for (std::size_t j = 0; j < rw; ++j) d += static_cast<std::size_t>(std::popcount(cw[j] ^ q[j]));
      out[s] = d;
    }
    return out;
  }

  friend bool operator==(const RangeTable& a, const RangeTable& b) {
    return a.matrix_ == b.matrix_ && a.codewords_ == b.codewords_ && a.offsets_ == b.offsets_ &&
           a.members_ == b.members_;
  }

  void write(std::ostream& out) const;
  static RangeTable read(std::istream& in, std::size_t rows, std::size_t cols, std::size_t range, Seed seed,
                         std::size_t n);

 private:
  static std::uint64_t hash_words(std::span<const std::uint64_t> words) {
    std::uint64_t h = 0x84222325cbf29ce4ULL;
    for (auto w : words) h = rng::mix64(h ^ w);
    return h;
  }

  void build_lookup() {
    lookup_.clear();
    lookup_.reserve(distinct());
    for (std::size_t s = 0; s < distinct(); ++s)
      lookup_.emplace_back(hash_words(codeword(s)), static_cast<std::uint32_t>(s));
    std::sort(lookup_.begin(), lookup_.end());
  }

  BinaryMatrix matrix_;
  std::vector<std::uint64_t> codewords_;  // distinct codewords, row_words() each
  std::vector<std::uint32_t> offsets_;    // members_ range of each codeword
  std::vector<std::uint32_t> members_;    // dataset indices grouped by codeword
  std::vector<std::pair<std::uint64_t, std::uint32_t>> lookup_;
};

/// How real vectors were turned into cube points; levels = 0 means the index
/// was built from raw bit strings.
struct EncoderInfo {
  unsigned levels = 0;
  MinMaxParams scale;

  friend bool operator==(const EncoderInfo& a, const EncoderInfo& b) {
    return a.levels == b.levels && a.scale.min == b.scale.min && a.scale.max == b.scale.max;
  }
};

class AnnIndex {
 public:
  static constexpr char magic[8] = {'B', 'K', 'N', 'N', 'A', 'N', 'N', '\0'};
  static constexpr std::uint32_t format_version = 1;

  AnnIndex() = default;

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return data_.size(); }
  std::size_t k() const { return k_; }
  std::size_t cols() const { return cols_; }
  const AnnParams& params() const { return params_; }
  Seed seed() const { return seed_; }
  const std::vector<BitString>& data() const { return data_; }
  const EncoderInfo& encoder() const { return encoder_; }
  void set_encoder(EncoderInfo e) { encoder_ = std::move(e); }

  std::size_t range_count() const { return dim_; }
  std::size_t repeats() const { return params_.repeats; }
  /// Draw `rep` of range `range` (1-based range).
  const RangeTable& table(std::size_t range, std::size_t rep) const { return tables_[(range - 1) * repeats() + rep]; }

  /// Datapoints within the image radius of range `range` around q's projection.
  std::size_t image_ball_count(const BitString& q, std::size_t range, std::size_t rep) const {
    const RangeTable& t = table(range, rep);
    const auto image = project(t.matrix(), q);
    const double radius = image_radius(range, cols_, params_.epsilon);
    const auto dist = t.image_distances(image);
    std::size_t count = 0;
    for (std::size_t s = 0; s < dist.size(); ++s)
      if (static_cast<double>(dist[s]) <= radius) count += t.members(s).size();
    return count;
  }

  /// Smallest range whose image ball holds at least k datapoints in draw
  /// `rep`, by binary search; D when even the largest range falls short.
  std::size_t search_range(const BitString& q, std::size_t k, std::size_t rep) const {
    std::size_t lo = 1, hi = dim_;
    while (lo < hi) {
      std::size_t mid = lo + (hi - lo) / 2;
      if (image_ball_count(q, mid, rep) >= k)
        hi = mid;
      else
        lo = mid + 1;
    }
    return lo;
  }

  NeighborSet query(const BitString& q, std::size_t k, Seed query_seed_) const {
    detail::require(q.size() == dim_, "kann_query: query length " + std::to_string(q.size()) +
                                          " differs from index dimension " + std::to_string(dim_));
    detail::check_k(k, size());
    const TieOrder ties(query_seed_);
    std::vector<char> in_bucket(size(), 0);
    std::vector<std::size_t> bucket;
    for (std::size_t rep = 0; rep < repeats(); ++rep) {
      const std::size_t range = search_range(q, k, rep);
      const RangeTable& t = table(range, rep);
      const auto dist = t.image_distances(project(t.matrix(), q));
      std::vector<std::pair<std::size_t, std::size_t>> cand;  // (image distance, datapoint)
      cand.reserve(size());
      for (std::size_t s = 0; s < dist.size(); ++s)
        for (std::uint32_t i : t.members(s)) cand.emplace_back(dist[s], i);
      auto cmp = [&](const auto& a, const auto& b) {
        return a.first != b.first ? a.first < b.first : ties.less(a.second, b.second);
      };
      std::nth_element(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k - 1), cand.end(), cmp);
      for (std::size_t j = 0; j < k; ++j)
        if (!in_bucket[cand[j].second]) {
          in_bucket[cand[j].second] = 1;
          bucket.push_back(cand[j].second);
        }
    }
    std::vector<std::pair<HammingMetric::key_type, std::size_t>> rerank;
    rerank.reserve(bucket.size());
    for (std::size_t i : bucket) rerank.emplace_back(hamming_distance(q, data_[i]), i);
    return detail::select_k<HammingMetric>(std::move(rerank), k, ties);
  }

  /// Versioned little-endian binary form.
  void write(std::ostream& out) const;
  static AnnIndex read(std::istream& in);

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw format_error("ann: cannot write '" + path + "'");
    write(out);
    if (!out) throw format_error("ann: write to '" + path + "' failed");
  }
  static AnnIndex load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw format_error("ann: cannot open '" + path + "'");
    return read(in);
  }

  /// FNV-1a over the serialized bytes.
  std::uint64_t digest() const {
    std::ostringstream buf(std::ios::binary);
    write(buf);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : buf.str()) h = (h ^ ch) * 0x100000001b3ULL;
    return h;
  }

  friend bool operator==(const AnnIndex& a, const AnnIndex& b) {
    return a.dim_ == b.dim_ && a.k_ == b.k_ && a.cols_ == b.cols_ && a.seed_ == b.seed_ && a.data_ == b.data_ &&
           a.tables_ == b.tables_ && a.encoder_ == b.encoder_ && a.params_.c == b.params_.c &&
           a.params_.epsilon == b.params_.epsilon && a.params_.delta == b.params_.delta &&
           a.params_.repeats == b.params_.repeats && a.params_.const_c == b.params_.const_c;
  }

  friend AnnIndex build_ann_index(std::vector<BitString> data, const AnnParams& params, std::size_t k, Seed seed,
                                  std::size_t threads);

 private:
  std::size_t dim_ = 0;
  std::size_t k_ = 0;
  std::size_t cols_ = 0;
  AnnParams params_;
  Seed seed_{};
  std::vector<BitString> data_;
  std::vector<RangeTable> tables_;  // range-major, repeats() per range
  EncoderInfo encoder_;
};

/// Seed of draw `rep` for range `range`.
inline Seed projection_seed(Seed master, std::size_t range, std::size_t rep) {
  return rng::derive(rng::derive(master, rng::tag_projection, range), rng::tag_projection, rep);
}

inline AnnIndex build_ann_index(std::vector<BitString> data, const AnnParams& params, std::size_t k, Seed seed,
                                std::size_t threads = 1) {
  detail::require(!data.empty(), "build_ann_index: empty dataset");
  detail::require(k >= 1, "build_ann_index: k must be positive");
  detail::require(data.size() >= k, "build_ann_index: n (" + std::to_string(data.size()) + ") < k (" +
                                        std::to_string(k) + ")");
  detail::require(data.size() < (std::size_t{1} << 32), "build_ann_index: too many datapoints");
  const std::size_t dim = data.front().size();
  detail::require(dim >= 1, "build_ann_index: zero-length strings");
  for (const auto& x : data) detail::require(x.size() == dim, "build_ann_index: inconsistent string lengths");

  AnnIndex index;
  index.params_ = params.resolved();
  index.dim_ = dim;
  index.k_ = k;
  index.seed_ = seed;
  index.cols_ = projected_dimension(data.size(), index.params_);
  index.data_ = std::move(data);
  const std::size_t reps = index.params_.repeats;
  index.tables_.resize(dim * reps);
  parallel_for(index.tables_.size(), threads, [&](std::size_t slot) {
    const std::size_t range = slot / reps + 1;
    const std::size_t rep = slot % reps;
    auto m = sample_projection(dim, index.data_.size(), range, index.params_, projection_seed(seed, range, rep));
    index.tables_[slot] = RangeTable(std::move(m), index.data_);
  });
  return index;
}

/// (k, c)-ANN query; k may differ from the k the index was built for.
inline NeighborSet kann_query(const AnnIndex& index, const BitString& q, std::size_t k, Seed query) {
  return index.query(q, k, query);
}

// ---------------------------------------------------------------------------
// Serialization

namespace detail {

static_assert(std::endian::native == std::endian::little, "index files are written little-endian");

template <class T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
void put_vec(std::ostream& out, const std::vector<T>& v) {
  put<std::uint64_t>(out, v.size());
  if (!v.empty()) out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw format_error("ann index: truncated file");
  return v;
}

template <class T>
std::vector<T> get_vec(std::istream& in, std::uint64_t max_len) {
  auto len = get<std::uint64_t>(in);
  if (len > max_len) throw format_error("ann index: corrupt length field");
  std::vector<T> v(len);
  if (len) in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(len * sizeof(T)));
  if (!in) throw format_error("ann index: truncated file");
  return v;
}

}  // namespace detail

inline void RangeTable::write(std::ostream& out) const {
  detail::put_vec(out, matrix_.raw());
  detail::put_vec(out, codewords_);
  detail::put_vec(out, offsets_);
  detail::put_vec(out, members_);
}

inline RangeTable RangeTable::read(std::istream& in, std::size_t rows, std::size_t cols, std::size_t range, Seed seed,
                                   std::size_t n) {
  RangeTable t;
  t.matrix_ = BinaryMatrix(rows, cols, range, seed);
  const std::size_t rw = t.matrix_.row_words();
  auto bits = detail::get_vec<std::uint64_t>(in, rows * rw);
  if (bits.size() != rows * rw) throw format_error("ann index: matrix size mismatch");
  t.matrix_.raw() = std::move(bits);
  t.codewords_ = detail::get_vec<std::uint64_t>(in, n * rw);
  t.offsets_ = detail::get_vec<std::uint32_t>(in, n + 1);
  t.members_ = detail::get_vec<std::uint32_t>(in, n);
  if (t.members_.size() != n || t.offsets_.size() < 2 || t.codewords_.size() != (t.offsets_.size() - 1) * rw ||
      t.offsets_.front() != 0 || t.offsets_.back() != n || !std::is_sorted(t.offsets_.begin(), t.offsets_.end()))
    throw format_error("ann index: inconsistent range table");
  for (auto i : t.members_)
    if (i >= n) throw format_error("ann index: member index out of range");
  t.build_lookup();
  return t;
}

inline void AnnIndex::write(std::ostream& out) const {
  out.write(magic, sizeof magic);
  detail::put<std::uint32_t>(out, format_version);
  detail::put<std::uint64_t>(out, dim_);
  detail::put<std::uint64_t>(out, data_.size());
  detail::put<std::uint64_t>(out, k_);
  detail::put<double>(out, params_.c);
  detail::put<double>(out, params_.epsilon);
  detail::put<double>(out, params_.delta);
  detail::put<std::uint64_t>(out, params_.repeats);
  detail::put<double>(out, params_.const_c);
  detail::put<std::uint64_t>(out, seed_.value);
  detail::put<std::uint64_t>(out, cols_);
  detail::put<std::uint32_t>(out, encoder_.levels);
  detail::put_vec(out, encoder_.scale.min);
  detail::put_vec(out, encoder_.scale.max);
  for (const auto& x : data_) out.write(reinterpret_cast<const char*>(x.words().data()),
                                        static_cast<std::streamsize>(x.words().size() * sizeof(std::uint64_t)));
  for (const auto& t : tables_) t.write(out);
}

inline AnnIndex AnnIndex::read(std::istream& in) {
  char head[sizeof magic];
  in.read(head, sizeof head);
  if (!in || std::memcmp(head, magic, sizeof magic) != 0) throw format_error("ann index: bad magic bytes");
  auto version = detail::get<std::uint32_t>(in);
  if (version != format_version)
    throw format_error("ann index: unsupported format version " + std::to_string(version));
  AnnIndex index;
  index.dim_ = detail::get<std::uint64_t>(in);
  const auto n = detail::get<std::uint64_t>(in);
  index.k_ = detail::get<std::uint64_t>(in);
  index.params_.c = detail::get<double>(in);
  index.params_.epsilon = detail::get<double>(in);
  index.params_.delta = detail::get<double>(in);
  index.params_.repeats = detail::get<std::uint64_t>(in);
  index.params_.const_c = detail::get<double>(in);
  index.seed_ = Seed{detail::get<std::uint64_t>(in)};
  index.cols_ = detail::get<std::uint64_t>(in);
  if (index.dim_ == 0 || n == 0 || n >= (std::uint64_t{1} << 32) || index.k_ == 0 || index.k_ > n ||
      index.params_.repeats == 0 || index.cols_ == 0 || index.dim_ > (1u << 24) || index.cols_ > (1u << 24))
    throw format_error("ann index: implausible header");
  index.encoder_.levels = detail::get<std::uint32_t>(in);
  index.encoder_.scale.min = detail::get_vec<double>(in, index.dim_);
  index.encoder_.scale.max = detail::get_vec<double>(in, index.dim_);
  index.data_.assign(n, BitString(index.dim_));
  for (auto& x : index.data_) {
    in.read(reinterpret_cast<char*>(x.words().data()),
            static_cast<std::streamsize>(x.words().size() * sizeof(std::uint64_t)));
    if (!in) throw format_error("ann index: truncated dataset");
  }
  index.tables_.reserve(index.dim_ * index.params_.repeats);
  for (std::size_t range = 1; range <= index.dim_; ++range)
    for (std::size_t rep = 0; rep < index.params_.repeats; ++rep)
      index.tables_.push_back(RangeTable::read(in, index.dim_, index.cols_, range,
                                               projection_seed(index.seed_, range, rep), n));
  return index;
}

}  // namespace borelknn
