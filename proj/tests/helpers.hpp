#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "weakmeas/random.hpp"
#include "weakmeas/state.hpp"

namespace weakmeas::testing {

/// s = (1, -1), alpha = (sqrt 0.8, sqrt 0.2). Stored sorted: index 0 is s = -1.
inline PureState reference_state() {
  return make_state({1.0, -1.0}, {std::sqrt(0.8), std::sqrt(0.2)});
}

inline PureState symmetric_qubit() {
  const double a = 1.0 / std::sqrt(2.0);
  return make_state({1.0, -1.0}, {a, a});
}

inline std::shared_ptr<const Spectrum> qubit_spectrum() {
  return std::make_shared<const Spectrum>(std::vector<double>{-1.0, 1.0});
}

inline PureState random_state(Stream& stream, std::size_t d) {
  std::vector<double> s(d);
  std::vector<Amplitude> a(d);
  for (std::size_t i = 0; i < d; ++i) {
    s[i] = static_cast<double>(i) - 1.5 + 0.3 * stream.uniform();
    a[i] = {stream.normal(0.0, 1.0), stream.normal(0.0, 1.0)};
  }
  return make_state(std::move(s), std::move(a), /*normalize=*/true);
}

inline double max_gap(const PureState& a, const PureState& b) {
  double g = 0.0;
  for (std::size_t i = 0; i < a.dimension(); ++i) g = std::max(g, std::abs(a[i] - b[i]));
  return g;
}

}  // namespace weakmeas::testing
