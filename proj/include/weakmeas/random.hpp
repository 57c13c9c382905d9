#pragma once

#include <cstdint>
#include <random>

namespace weakmeas {

/// Explicit random stream. Nothing in the library draws randomness from
/// anywhere else.
///
/// Per-trajectory streams come from `for_trajectory`: the master seed and the
/// trajectory index are each passed through splitmix64 and the resulting
/// 256 bits feed a std::seed_seq, which initialises a 64-bit Mersenne
/// Twister. The mapping depends only on (master_seed, index), never on the
/// thread that runs the trajectory.
class Stream {
 public:
  explicit Stream(std::uint64_t seed);

  static Stream for_trajectory(std::uint64_t master_seed, std::uint64_t index);

  /// Uniform on [0, 1).
  double uniform();
  double normal(double mean, double stddev);

 private:
  explicit Stream(std::seed_seq& seq);

  std::mt19937_64 engine_;
  std::normal_distribution<double> standard_normal_{0.0, 1.0};
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace weakmeas
