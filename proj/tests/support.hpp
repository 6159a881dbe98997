// Copyright 2026 The mfra Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MFRA_TESTS_SUPPORT_HPP_
#define MFRA_TESTS_SUPPORT_HPP_

// Helpers shared by the test programs: small random instances and a
// reproducible uniform draw.

#include <cstdint>
#include <random>
#include <vector>

#include "mfra/core_model.hpp"

namespace mfra::testing {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  // Uniform on [lo, hi), built from the raw 64-bit stream so values do not
  // depend on the standard library's distribution code.
  double uniform(double lo = 0.0, double hi = 1.0) {
    const double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }
  int pick(int count) {
    return static_cast<int>(uniform() * count) % count;
  }
  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

inline Vector random_vector(Rng& rng, Index n, double lo, double hi) {
  Vector v(n);
  for (Index k = 0; k < n; ++k) v[k] = rng.uniform(lo, hi);
  return v;
}

// Mixed users (latency/simplex, separable quadratic/box, log-rate/capped
// orthant) and mixed costs on a small, well-scaled instance.
inline ProblemInstance random_tiny_instance(Rng& rng, Index N, Index n) {
  std::vector<UserSpec> users;
  double committed = 0.0;
  for (Index i = 0; i < N; ++i) {
    switch (rng.pick(3)) {
      case 0: {
        const double t = rng.uniform(0.5, 2.0);
        committed += t;
        users.push_back({ConcaveUtility::quadratic_latency(
                             rng.uniform(0.5, 2.0), t,
                             random_vector(rng, n, 0.05, 0.5)),
                         FeasibleSet::scaled_simplex(t)});
        break;
      }
      case 1:
        users.push_back({ConcaveUtility::separable_quadratic(
                             random_vector(rng, n, 0.2, 1.5),
                             random_vector(rng, n, 0.5, 2.0)),
                         FeasibleSet::box(Vector::Zero(n),
                                          random_vector(rng, n, 1.0, 2.0))});
        break;
      default: {
        DenseMatrix sel = DenseMatrix::Identity(n, n);
        users.push_back({ConcaveUtility::log_rate(rng.uniform(0.5, 2.0), sel),
                         FeasibleSet::nonneg_cap(random_vector(rng, n, 1.0, 2.0))});
        break;
      }
    }
  }
  std::vector<FacilitySpec> facilities;
  for (Index j = 0; j < n; ++j) {
    const double hi = 1.5 * committed / static_cast<double>(n) + 1.0;
    ConvexCost cost;
    switch (rng.pick(4)) {
      case 0:
        cost = ConvexCost::linear(rng.uniform(0.1, 1.0), rng.uniform(0.0, 0.5));
        break;
      case 1:
        cost = ConvexCost::quadratic(rng.uniform(0.1, 1.0), rng.uniform(0.0, 0.5));
        break;
      case 2: {
        EnergyCost e;
        e.energy_price = rng.uniform(0.5, 1.0);
        e.pue = 1.5;
        e.idle_power = 0.2;
        e.peak_power = 0.2 + rng.uniform(0.2, 0.6);
        e.servers = hi;
        cost = ConvexCost::energy(e);
        break;
      }
      default: {
        const double b = rng.uniform(0.1, 0.5);
        cost = ConvexCost::piecewise_linear({0.4 * hi, 0.8 * hi}, {b, 2 * b, 4 * b});
        break;
      }
    }
    facilities.push_back({cost, 0.0, hi});
  }
  return ProblemInstance(std::move(users), std::move(facilities));
}

}  // namespace mfra::testing

#endif  // MFRA_TESTS_SUPPORT_HPP_
