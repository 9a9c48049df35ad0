#pragma once

#include <cstdint>
#include <random>

namespace toff {

/// Deterministic random source identified by (seed, stream id).
///
/// Each Monte Carlo replication owns one stream; the draw sequence depends
/// only on the pair, never on scheduling. Variates are produced from the raw
/// 64-bit engine output with fixed arithmetic so sequences are identical
/// across standard-library implementations.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Exponential with the given rate (> 0).
  double exponential(double rate);
  /// Standard normal (Marsaglia polar method).
  double normal();

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace toff
