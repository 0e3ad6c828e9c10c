#pragma once

#include <string>

#include "trec/tensor.hpp"

namespace trec {

// DTNS v1: 8-byte magic "DTNS0001", u32 little-endian order d, d u64
// little-endian dims, then prod(dims) f64 little-endian values in canonical
// layout.
void save_dtns(const DenseTensor& t, const std::string& path);
DenseTensor load_dtns(const std::string& path);

/// Whitespace-delimited text fixture: d, then d dims, then the values in
/// canonical order.
DenseTensor load_tensor_text(const std::string& path);

}  // namespace trec
