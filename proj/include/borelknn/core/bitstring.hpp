#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "borelknn/core/error.hpp"

namespace borelknn {

/// Fixed-length bit string, a point of the Hamming cube {0,1}^D.
/// Bit 0 is the leftmost character of the textual form.
class BitString {
 public:
  BitString() = default;
  explicit BitString(std::size_t length) : length_(length), words_((length + 63) / 64, 0) {}

  static BitString from_string(std::string_view text) {
    BitString b(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
      detail::require(text[i] == '0' || text[i] == '1', "bitstring: expected only '0' and '1'");
      if (text[i] == '1') b.set(i);
    }
    return b;
  }

  std::size_t size() const { return length_; }
  std::size_t word_count() const { return words_.size(); }
  const std::vector<std::uint64_t>& words() const { return words_; }
  std::vector<std::uint64_t>& words() { return words_; }

  bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1U; }
  void set(std::size_t i, bool value = true) {
    std::uint64_t mask = std::uint64_t{1} << (i & 63);
    if (value)
      words_[i >> 6] |= mask;
    else
      words_[i >> 6] &= ~mask;
  }

  std::size_t popcount() const {
    std::size_t total = 0;
    for (auto w : words_) total += static_cast<std::size_t>(std::popcount(w));
    return total;
  }

  BitString& operator^=(const BitString& other) {
    detail::require(length_ == other.length_, "bitstring: length mismatch");
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= other.words_[i];
    return *this;
  }
  friend BitString operator^(BitString a, const BitString& b) { return a ^= b; }

  friend bool operator==(const BitString&, const BitString&) = default;

  std::string to_string() const {
    std::string s(length_, '0');
    for (std::size_t i = 0; i < length_; ++i)
      if (test(i)) s[i] = '1';
    return s;
  }

 private:
  std::size_t length_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Number of positions where the strings differ.
inline std::size_t hamming_distance(const BitString& a, const BitString& b) {
  detail::require(a.size() == b.size(), "hamming: length mismatch (" + std::to_string(a.size()) +
                                            " vs " + std::to_string(b.size()) + ")");
  std::size_t total = 0;
  const auto& wa = a.words();
  const auto& wb = b.words();
  for (std::size_t i = 0; i < wa.size(); ++i) total += static_cast<std::size_t>(std::popcount(wa[i] ^ wb[i]));
  return total;
}

}  // namespace borelknn
