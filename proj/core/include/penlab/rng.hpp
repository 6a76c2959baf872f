#pragma once

#include <cstdint>

namespace penlab {

/// Deterministic counter-based random stream.
///
/// A stream is identified by (base_seed, stream_id); equal identifiers always
/// produce the same sequence, and the sequence does not depend on what any
/// other stream did. Children derived with split() inherit determinism from
/// the parent's identity, not from how far the parent has advanced, so the
/// consumption order across threads cannot change results.
class RngStream {
 public:
  RngStream(std::uint64_t base_seed, std::uint64_t stream_id);

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double next_double();

  /// Standard normal draw (Box-Muller; pairs are cached).
  double next_gaussian();

  /// Independent child stream determined by (identity, tag) only.
  RngStream split(std::uint64_t tag) const;

  std::uint64_t key() const { return key_; }

 private:
  explicit RngStream(std::uint64_t key) : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_gauss_ = 0.0;
  bool has_cached_gauss_ = false;
};

}  // namespace penlab
