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

#ifndef MFRA_STATE_HPP_
#define MFRA_STATE_HPP_

#include "mfra/core_model.hpp"

namespace mfra {

// Dual-decomposition stores the unscaled multiplier lambda in `u`; the ADMM
// variants store the scaled dual u = lambda / rho. Steps refuse a state
// carrying the other convention.
enum class DualConvention { kScaled, kUnscaled };

struct SolverState {
  AllocationMatrix x;  // N x n
  Vector y;            // n
  Vector u;            // n, shared by every user (v = u / N)
  Vector u_prev;       // u of the previous iterate, for z^k and residuals
  Vector d;            // (u + sum_i x_i - y) / N after the last update
  Index k = 0;
  DualConvention convention = DualConvention::kScaled;

  Index num_users() const { return x.rows(); }
  Index num_facilities() const { return x.cols(); }

  // v^k = u^k / N
  Vector v() const { return u / static_cast<double>(num_users()); }
  // z_i^k = x_i^k + v^{k-1} - v^k, as one N x n matrix
  AllocationMatrix z() const;
};

// Optimal primal-dual pair of the split reformulation, from a tight run.
struct ReferenceSolution {
  AllocationMatrix x_star;
  AllocationMatrix z_star;
  Vector v_star;
  double p_star = 0.0;
  Index iterations = 0;
  double final_dk_over_n = 0.0;
  double max_violation = 0.0;
  bool low_confidence = false;
};

}  // namespace mfra

#endif  // MFRA_STATE_HPP_
