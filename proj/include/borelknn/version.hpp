#pragma once

namespace borelknn {

inline constexpr const char* version = "0.1.0";

}  // namespace borelknn
