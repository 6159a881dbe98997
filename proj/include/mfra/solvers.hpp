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

#ifndef MFRA_SOLVERS_HPP_
#define MFRA_SOLVERS_HPP_

// Iterative solvers as single-step state transitions plus a driver loop.
//
//   dual decomposition   x: argmin -f_i + lambda.x_i, y: argmin g_j - lambda_j y_j,
//                        lambda += rho^k (sum x - y)
//   ADMM, x first        x_i: prox of -f_i at x_i - d,  y_j: prox of g_j with
//                        weight rho/N at sum x + u,  u += sum x - y
//   ADMM, y first        same updates with the y-update first
//   linearized ADMM      x_i: prox of -f_i with weight r at x_i - g/r,
//                        g = rho (sum x - y + u); requires r > rho N
//
// d = (u + sum_i x_i - y) / N in both ADMM variants.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "mfra/core_model.hpp"
#include "mfra/diagnostics.hpp"
#include "mfra/runtime.hpp"
#include "mfra/state.hpp"

namespace mfra {

enum class Algorithm { kDualDecomposition, kAdmmXFirst, kAdmmYFirst, kLinearizedAdmm };

enum class StepRule { kConstant, kDiminishing };

// Starting value of the scaled dual in the ADMM variants. kZero is u^0 = 0.
// kMarginalCost sets rho u_j^0 / N to the right derivative of g_j at y_j^0,
// a subgradient of g_j + indicator(Y_j) there, so (z^0, v^0) is already a
// possible output of a z-update and the D^k guarantees hold from k = 0.
enum class DualStart { kZero, kMarginalCost };

struct SolverConfig {
  double rho = 1e-3;  // ADMM penalty; initial dual step for dual decomposition
  Index max_iters = 400;
  double stop_threshold = 1e-8;  // on D^k / N
  // Dual decomposition only: rho^k = rho or rho / sqrt(k + 1).
  StepRule dual_step_rule = StepRule::kDiminishing;
  double linearized_r = 0.0;  // linearized ADMM proximal weight, > rho N
  DualStart dual_start = DualStart::kMarginalCost;  // ADMM variants only

  void validate(Algorithm algorithm, Index num_users) const;
};

struct RuntimeConfig {
  Index worker_count = 1;
  AggregationPlan plan;
  FaultPolicy faults;
};

// Weight of the vanishing regularizer that makes the dual-decomposition
// subproblems single-valued.
inline constexpr double kDualTieBreak = 1e-12;

// x^0 = projection of 0 onto each X_i, y^0 = clip(sum x^0, Y). The unscaled
// (dual decomposition) multiplier starts at 0; the scaled dual follows
// dual_start. u_prev is set to u^0 - (sum x^0 - y^0), which makes z^0 the
// split-reformulation state that the first x-update actually uses
// (sum_i z_i^0 = y^0).
SolverState initial_state(const ProblemInstance& inst, DualConvention convention,
                          double rho = 1.0,
                          DualStart dual_start = DualStart::kMarginalCost);

SolverState step_dual_decomposition(const SolverState& state,
                                    const ProblemInstance& inst,
                                    const SolverConfig& config,
                                    const RuntimeConfig& runtime = {});
SolverState step_admm1(const SolverState& state, const ProblemInstance& inst,
                       const SolverConfig& config,
                       const RuntimeConfig& runtime = {});
SolverState step_admm2(const SolverState& state, const ProblemInstance& inst,
                       const SolverConfig& config,
                       const RuntimeConfig& runtime = {});
SolverState step_linearized_admm(const SolverState& state,
                                 const ProblemInstance& inst,
                                 const SolverConfig& config,
                                 const RuntimeConfig& runtime = {});

SolverState step(Algorithm algorithm, const SolverState& state,
                 const ProblemInstance& inst, const SolverConfig& config,
                 const RuntimeConfig& runtime = {});

// Split reformulation with per-user copies z_i = x_i and per-user duals v_i;
// the coupled z-update is solved by nesting a hyperplane projection inside a
// scalar bisection. Only for tiny instances (N * n <= 6).
struct ReformulationState {
  AllocationMatrix x;
  AllocationMatrix z;
  AllocationMatrix v;  // row i is v_i
  Index k = 0;
};

inline constexpr Index kReformulationMaxSize = 6;

ReformulationState reformulation_from(const SolverState& state);
ReformulationState step_reference_reformulation(const ReformulationState& state,
                                                const ProblemInstance& inst,
                                                const SolverConfig& config);

enum class Termination { kThreshold, kIterationLimit };

std::string to_string(Termination t);
std::string to_string(Algorithm a);

struct RunOptions {
  Algorithm algorithm = Algorithm::kAdmmXFirst;
  SolverConfig config;
  RuntimeConfig runtime;
  const ReferenceSolution* reference = nullptr;  // enables the Vk column
  bool record_timing = false;
  std::optional<SolverState> initial;
  std::function<void(const MetricsRow&, const SolverState&)> observer;
};

struct RunResult {
  SolverState initial;
  SolverState final_state;
  ConvergenceMetrics trace;
  Termination termination = Termination::kIterationLimit;
  std::optional<double> initial_vk;  // V^0 when a reference is supplied
  Index total_faults = 0;
};

RunResult run(const ProblemInstance& inst, const RunOptions& options);

inline constexpr double kReferenceThreshold = 1e-14;
inline constexpr Index kReferenceMaxIters = 100000;

// Runs x-first ADMM until D^k/N < threshold and extracts x*, z*, v*, p*.
// Flags the result as low-confidence if the threshold is not reached or the
// feasibility violations exceed 1e-8.
ReferenceSolution solve_reference(const ProblemInstance& inst, double rho,
                                  double threshold = kReferenceThreshold,
                                  Index max_iters = kReferenceMaxIters);

}  // namespace mfra

#endif  // MFRA_SOLVERS_HPP_
