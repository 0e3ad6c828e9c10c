#include "trec/flops.hpp"

namespace trec::flops {

namespace {
thread_local std::uint64_t g_macs = 0;
}

void reset() { g_macs = 0; }

std::uint64_t total() { return g_macs; }

void add(std::uint64_t macs) { g_macs += macs; }

}  // namespace trec::flops
