#pragma once

#include <stdexcept>
#include <string>

namespace borelknn {

/// Bad arguments or violated preconditions (dimension mismatch, k > n, ...).
class invalid_argument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input files: CSV cells, index files, experiment specs.
class format_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

[[noreturn]] inline void fail(const std::string& what) { throw invalid_argument(what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(what);
}

}  // namespace detail
}  // namespace borelknn
