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

#ifndef MFRA_DIAGNOSTICS_HPP_
#define MFRA_DIAGNOSTICS_HPP_

// Convergence quantities for the distributed ADMM iterations. With
// v^k = u^k / N and z_i^k = x_i^k + v^{k-1} - v^k:
//
//   D^k = sum_i ( |z_i^{k+1} - z_i^k|^2 + |v^{k+1} - v^k|^2 )
//   V^k = sum_i ( |z_i^k - z_i^*|^2 + |v^k - v^*|^2 )
//   primal residual = sum_i |x_i^k - z_i^k|^2
//
// D^k is non-increasing along x-first ADMM runs and bounded by V^0 / (k+1).

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "mfra/state.hpp"

namespace mfra {

struct MetricsRow {
  Index iter = 0;  // iterations completed; the row describes iterate x^iter
  double objective = 0.0;
  double dk = 0.0;  // D^{iter-1}: the step that produced this iterate
  std::optional<double> vk;
  std::optional<double> primal_residual;
  double coupling_residual = 0.0;  // |sum_i x_i - y|^2
  std::uint64_t comm_rounds = 0;   // cumulative
  std::optional<double> wall_ms;
};

struct ConvergenceMetrics {
  std::vector<MetricsRow> rows;
};

double compute_Dk(const SolverState& current, const SolverState& next);

double compute_Vk(const SolverState& state, const ReferenceSolution& ref);

struct PrimalResidual {
  double from_z = 0.0;  // sum_i |x_i - z_i|^2
  double from_v = 0.0;  // N |v^k - v^{k-1}|^2
};

PrimalResidual compute_primal_residual(const SolverState& state);

double coupling_residual(const SolverState& state);

enum class RateModel { kSublinear, kGeometric };

// Sublinear: y ~ constant * (k+1)^exponent (log-log fit; exponent near -1 for
// an O(1/k) sequence). Geometric: y ~ constant * a^{-k} (semi-log fit).
struct RateFit {
  Index k0 = 0;
  Index k1 = 0;
  RateModel model = RateModel::kGeometric;
  double constant = 0.0;
  double exponent = 0.0;  // sublinear only
  double a = 1.0;         // geometric only
  double r_squared = 0.0;
};

// values[k] is the sequence at index k; the window [k0, k1] is inclusive and
// must hold at least 10 positive values.
RateFit fit_rate(const std::vector<double>& values, Index k0, Index k1,
                 RateModel model);

// Column header: iter,objective,Dk,Vk,primal_residual,coupling_residual,
// comm_rounds,wall_ms. Missing optional values are written as empty fields.
void write_trace_csv(std::ostream& out, const ConvergenceMetrics& metrics);

}  // namespace mfra

#endif  // MFRA_DIAGNOSTICS_HPP_
