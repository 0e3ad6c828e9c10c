#pragma once

namespace trec {

inline constexpr const char* kVersionString = "0.1.0";

}  // namespace trec
