#pragma once

#include <cstdint>
#include <string_view>

namespace trec::rng {

/// Counter-based generator: output i of a stream with key s is
/// mix64(s + (i+1)*GAMMA), the splitmix64 sequence seeded at s. Streams are
/// split by hashing a label into a child key, so (experiment, trial, purpose)
/// substreams never overlap. The algorithm id below is recorded in every
/// output file the harness writes.
inline constexpr const char* kAlgorithmId = "splitmix64";

inline constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

/// splitmix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// FNV-1a, used for labelling streams and hashing config text.
std::uint64_t hash_str(std::string_view s);

class Stream {
 public:
  explicit Stream(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64() {
    counter_ += 1;
    return mix64(key_ + counter_ * kGamma);
  }

  /// Uniform in [0, 1), 53-bit resolution.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via the trigonometric Box-Muller transform; consumes
  /// exactly two uniforms per pair, second value cached.
  double next_gaussian();

  /// Uniform in [0, bound) by the multiply-shift map; bias is O(bound/2^64).
  std::uint64_t below(std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
  }

  Stream child(std::uint64_t label) const {
    return Stream(mix64(key_ ^ mix64(label + kGamma)));
  }
  Stream child(std::string_view label) const { return child(hash_str(label)); }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace trec::rng
