#include "weakmeas/random.hpp"

#include <array>

namespace weakmeas {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Stream::Stream(std::uint64_t seed) : engine_(seed) {}

Stream::Stream(std::seed_seq& seq) : engine_(seq) {}

Stream Stream::for_trajectory(std::uint64_t master_seed, std::uint64_t index) {
  std::uint64_t a = master_seed;
  std::uint64_t b = index ^ 0xd1b54a32d192ed03ULL;
  std::array<std::uint64_t, 4> mixed{splitmix64(a), splitmix64(b),
                                     splitmix64(a), splitmix64(b)};
  std::array<std::uint32_t, 8> words{};
  for (std::size_t k = 0; k < mixed.size(); ++k) {
    words[2 * k] = static_cast<std::uint32_t>(mixed[k]);
    words[2 * k + 1] = static_cast<std::uint32_t>(mixed[k] >> 32);
  }
  std::seed_seq seq(words.begin(), words.end());
  return Stream(seq);
}

double Stream::uniform() { return unit_(engine_); }

double Stream::normal(double mean, double stddev) {
  return mean + stddev * standard_normal_(engine_);
}

}  // namespace weakmeas
