#pragma once

#include <cstdint>

namespace trec::flops {

/// Running tally of multiply-accumulate operations performed by the numeric
/// kernels (matrix products, Householder reflections, Jacobi rotations).
/// Elementwise adds, copies and permutations are not counted. The tally is
/// thread-local; kernels add their counts at the call site, before any
/// internal parallel region, so the count is independent of threading.
void reset();
std::uint64_t total();
void add(std::uint64_t macs);

}  // namespace trec::flops
