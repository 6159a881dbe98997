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

#ifndef MFRA_SUBPROBLEMS_HPP_
#define MFRA_SUBPROBLEMS_HPP_

// Minimizers for the per-user and per-facility subproblems that every
// iteration of the solvers is built from:
//
//   user:      argmin_{x in X} -f(x) + (rho/2) ||x - anchor||^2
//   facility:  argmin_{y in [lo,hi]} g(y) + (weight/2) (y - anchor)^2
//
// Both are strongly convex, so minimizers are unique.

#include <functional>
#include <variant>

#include "mfra/core_model.hpp"

namespace mfra {

struct ProxResult {
  Vector minimizer;
  double subproblem_value = 0.0;
  int iterations_used = 0;
};

struct ScalarProxResult {
  double minimizer = 0.0;
  double subproblem_value = 0.0;
  int iterations_used = 0;
};

ProxResult prox_user(const ConcaveUtility& utility, const FeasibleSet& set,
                     const Vector& anchor, double rho);

ScalarProxResult prox_facility(const ConvexCost& cost, double lower,
                               double upper, double anchor, double weight);

// Euclidean projection onto {x >= 0 : sum x = total} by the sorted-threshold
// method.
Vector project_scaled_simplex(const Vector& v, double total);

// Euclidean projection onto {A w : 0 <= w <= cap}.
Vector project_capped_path(const CappedPathSet& set, const Vector& v);

// Projected-gradient fixed-point residual ||x - P(x - grad)||_inf of the user
// subproblem at x. Zero exactly at the minimizer.
double user_stationarity_residual(const ConcaveUtility& utility,
                                  const FeasibleSet& set, const Vector& anchor,
                                  double rho, const Vector& x);

// Exhaustive grid search, used as an independent oracle in tests.
struct GridBox {
  Vector lower;
  Vector upper;
};
struct GridSimplex {
  Index dim = 1;
  double total = 1.0;
};
using GridDomain = std::variant<GridBox, GridSimplex>;

// Dimension must be at most 3; throws UnsupportedError otherwise.
Vector brute_force_minimize(const std::function<double(const Vector&)>& objective,
                            const GridDomain& domain, double step);

}  // namespace mfra

#endif  // MFRA_SUBPROBLEMS_HPP_
