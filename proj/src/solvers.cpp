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

#include "mfra/solvers.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "mfra/errors.hpp"
#include "mfra/subproblems.hpp"

namespace mfra {

void SolverConfig::validate(Algorithm algorithm, Index num_users) const {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw ParameterError("rho must be positive and finite");
  }
  if (max_iters < 0) throw ParameterError("max_iters must be >= 0");
  if (!(stop_threshold >= 0.0)) {
    throw ParameterError("stop_threshold must be >= 0");
  }
  if (algorithm == Algorithm::kLinearizedAdmm &&
      !(linearized_r > rho * static_cast<double>(num_users))) {
    throw ParameterError("linearized ADMM needs r > rho * N (r = " +
                         std::to_string(linearized_r) + ", rho * N = " +
                         std::to_string(rho * static_cast<double>(num_users)) +
                         ")");
  }
}

namespace {

void check_state(const SolverState& s, const ProblemInstance& inst,
                 DualConvention expected) {
  const Index N = inst.num_users();
  const Index n = inst.num_facilities();
  if (s.x.rows() != N || s.x.cols() != n || s.y.size() != n ||
      s.u.size() != n || s.u_prev.size() != n) {
    throw ShapeError("state dimensions do not match the instance");
  }
  if (s.convention != expected) {
    throw ParameterError(
        "state carries the wrong dual convention for this algorithm");
  }
}

Vector scaled_d(const Vector& u, const Vector& sum_x, const Vector& y,
                Index N) {
  return (u + sum_x - y) / static_cast<double>(N);
}

Vector facility_updates(const ProblemInstance& inst, const Vector& anchor,
                        double weight) {
  const Index n = inst.num_facilities();
  Vector y(n);
  for (Index j = 0; j < n; ++j) {
    const FacilitySpec& f = inst.facility(j);
    y[j] = prox_facility(f.cost, f.lower, f.upper, anchor[j], weight).minimizer;
  }
  return y;
}

}  // namespace

SolverState initial_state(const ProblemInstance& inst,
                          DualConvention convention, double rho,
                          DualStart dual_start) {
  if (!(rho > 0.0)) throw ParameterError("rho must be positive");
  const Index N = inst.num_users();
  const Index n = inst.num_facilities();
  SolverState s;
  s.convention = convention;
  s.x.resize(N, n);
  const Vector zero = Vector::Zero(n);
  for (Index i = 0; i < N; ++i) {
    s.x.row(i) = inst.user(i).feasible.project(zero).transpose();
  }
  const Vector sum_x = column_sums(s.x);
  s.y.resize(n);
  for (Index j = 0; j < n; ++j) {
    s.y[j] = project_feasible_y(inst.facility(j), sum_x[j]);
  }
  s.u = Vector::Zero(n);
  if (convention == DualConvention::kScaled &&
      dual_start == DualStart::kMarginalCost) {
    const double scale = static_cast<double>(N) / rho;
    for (Index j = 0; j < n; ++j) {
      s.u[j] = scale * inst.facility(j).cost.derivative(s.y[j]);
    }
  }
  if (convention == DualConvention::kScaled) {
    s.u_prev = s.u - (sum_x - s.y);
    s.d = scaled_d(s.u, sum_x, s.y, N);
  } else {
    s.u_prev = s.u;
    s.d = sum_x - s.y;
  }
  return s;
}

SolverState step_dual_decomposition(const SolverState& state,
                                    const ProblemInstance& inst,
                                    const SolverConfig& config,
                                    const RuntimeConfig& runtime) {
  check_state(state, inst, DualConvention::kUnscaled);
  const Vector& lambda = state.u;

  // -f(x) + lambda.x + eps |x|^2 is prox_user with rho = 2 eps at anchor
  // -lambda / (2 eps).
  XUpdateRequest req;
  req.rho = 2.0 * kDualTieBreak;
  req.anchor_weight = 0.0;
  req.shift = lambda / req.rho;
  XUpdateOutcome xo = execute_x_updates(inst, state.x, req,
                                        static_cast<std::uint64_t>(state.k),
                                        runtime.faults, runtime.worker_count);

  SolverState next;
  next.convention = state.convention;
  next.x = std::move(xo.x);
  const Vector sum_x = aggregate(next.x, runtime.plan);
  next.y = facility_updates(inst, lambda / req.rho, req.rho);

  double step = config.rho;
  if (config.dual_step_rule == StepRule::kDiminishing) {
    step /= std::sqrt(static_cast<double>(state.k) + 1.0);
  }
  next.d = sum_x - next.y;
  next.u_prev = state.u;
  next.u = state.u + step * next.d;
  next.k = state.k + 1;
  return next;
}

SolverState step_admm1(const SolverState& state, const ProblemInstance& inst,
                       const SolverConfig& config,
                       const RuntimeConfig& runtime) {
  check_state(state, inst, DualConvention::kScaled);
  const Index N = inst.num_users();
  const double rho = config.rho;

  XUpdateRequest req;
  req.rho = rho;
  req.shift = scaled_d(state.u, column_sums(state.x), state.y, N);
  XUpdateOutcome xo = execute_x_updates(inst, state.x, req,
                                        static_cast<std::uint64_t>(state.k),
                                        runtime.faults, runtime.worker_count);

  SolverState next;
  next.convention = state.convention;
  next.x = std::move(xo.x);
  const Vector sum_x = aggregate(next.x, runtime.plan);
  next.y = facility_updates(inst, sum_x + state.u,
                            rho / static_cast<double>(N));
  next.u_prev = state.u;
  next.u = state.u + (sum_x - next.y);
  next.d = scaled_d(next.u, sum_x, next.y, N);
  broadcast(next.d, runtime.plan);
  next.k = state.k + 1;
  return next;
}

SolverState step_admm2(const SolverState& state, const ProblemInstance& inst,
                       const SolverConfig& config,
                       const RuntimeConfig& runtime) {
  check_state(state, inst, DualConvention::kScaled);
  const Index N = inst.num_users();
  const double rho = config.rho;

  SolverState next;
  next.convention = state.convention;
  const Vector sum_prev = column_sums(state.x);
  next.y = facility_updates(inst, sum_prev + state.u,
                            rho / static_cast<double>(N));

  XUpdateRequest req;
  req.rho = rho;
  req.shift = scaled_d(state.u, sum_prev, next.y, N);
  broadcast(req.shift, runtime.plan);
  XUpdateOutcome xo = execute_x_updates(inst, state.x, req,
                                        static_cast<std::uint64_t>(state.k),
                                        runtime.faults, runtime.worker_count);
  next.x = std::move(xo.x);
  const Vector sum_x = aggregate(next.x, runtime.plan);
  next.u_prev = state.u;
  next.u = state.u + (sum_x - next.y);
  next.d = scaled_d(next.u, sum_x, next.y, N);
  next.k = state.k + 1;
  return next;
}

SolverState step_linearized_admm(const SolverState& state,
                                 const ProblemInstance& inst,
                                 const SolverConfig& config,
                                 const RuntimeConfig& runtime) {
  check_state(state, inst, DualConvention::kScaled);
  config.validate(Algorithm::kLinearizedAdmm, inst.num_users());
  const double rho = config.rho;
  const double r = config.linearized_r;

  const Vector g = rho * (column_sums(state.x) - state.y + state.u);
  broadcast(g, runtime.plan);
  XUpdateRequest req;
  req.rho = r;
  req.shift = g / r;
  XUpdateOutcome xo = execute_x_updates(inst, state.x, req,
                                        static_cast<std::uint64_t>(state.k),
                                        runtime.faults, runtime.worker_count);

  SolverState next;
  next.convention = state.convention;
  next.x = std::move(xo.x);
  const Vector sum_x = aggregate(next.x, runtime.plan);
  next.y = facility_updates(inst, sum_x + state.u, rho);
  next.u_prev = state.u;
  next.u = state.u + (sum_x - next.y);
  next.d = scaled_d(next.u, sum_x, next.y, inst.num_users());
  next.k = state.k + 1;
  return next;
}

SolverState step(Algorithm algorithm, const SolverState& state,
                 const ProblemInstance& inst, const SolverConfig& config,
                 const RuntimeConfig& runtime) {
  switch (algorithm) {
    case Algorithm::kDualDecomposition:
      return step_dual_decomposition(state, inst, config, runtime);
    case Algorithm::kAdmmXFirst:
      return step_admm1(state, inst, config, runtime);
    case Algorithm::kAdmmYFirst:
      return step_admm2(state, inst, config, runtime);
    case Algorithm::kLinearizedAdmm:
      return step_linearized_admm(state, inst, config, runtime);
  }
  throw ParameterError("unknown algorithm");
}

// ---------------------------------------------------------------------------
// Split reformulation

ReformulationState reformulation_from(const SolverState& state) {
  if (state.convention != DualConvention::kScaled) {
    throw ParameterError("reformulation needs a scaled-dual state");
  }
  ReformulationState r;
  r.x = state.x;
  r.z = state.z();
  const Vector v = state.v();
  r.v.resize(state.num_users(), state.num_facilities());
  r.v.rowwise() = v.transpose();
  r.k = state.k;
  return r;
}

namespace {

// argmin_{s in [lo, hi]} g(s) + (w/2)(s - c)^2 by bisection on the
// subdifferential. Kept separate from prox_facility on purpose.
double nested_scalar_min(const ConvexCost& cost, double lo, double hi,
                         double c, double w) {
  auto right = [&](double s) { return cost.derivative(s) + w * (s - c); };
  auto left = [&](double s) { return cost.left_derivative(s) + w * (s - c); };
  if (right(lo) >= 0.0) return lo;
  if (left(hi) <= 0.0) return hi;
  double a = lo, b = hi;
  for (int it = 0; it < 200 && b - a > 0.0; ++it) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    if (right(m) < 0.0) {
      if (left(m) <= 0.0) {
        a = m;
      } else {
        return m;  // 0 in [left(m), right(m)] cannot happen here
      }
    } else if (left(m) > 0.0) {
      b = m;
    } else {
      return m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

ReformulationState step_reference_reformulation(const ReformulationState& state,
                                                const ProblemInstance& inst,
                                                const SolverConfig& config) {
  const Index N = inst.num_users();
  const Index n = inst.num_facilities();
  if (N * n > kReformulationMaxSize) {
    throw UnsupportedError("reference reformulation is limited to N * n <= " +
                           std::to_string(kReformulationMaxSize));
  }
  if (state.x.rows() != N || state.x.cols() != n || state.z.rows() != N ||
      state.z.cols() != n || state.v.rows() != N || state.v.cols() != n) {
    throw ShapeError("reformulation state does not match the instance");
  }
  const double rho = config.rho;
  ReformulationState next;
  next.k = state.k + 1;
  next.x.resize(N, n);
  for (Index i = 0; i < N; ++i) {
    const Vector anchor = (state.z.row(i) - state.v.row(i)).transpose();
    const UserSpec& u = inst.user(i);
    next.x.row(i) =
        prox_user(u.utility, u.feasible, anchor, rho).minimizer.transpose();
  }

  // z-update, one facility at a time: minimize
  //   g_j(sum_i z_ij) + (rho/2) sum_i (z_ij - b_ij)^2,  b = x^{k+1} + v^k.
  // For a fixed column sum s the inner problem is a projection onto a
  // hyperplane, z_ij = b_ij + (s - sum_i b_ij)/N, and its value is
  // (rho/2N)(s - sum_i b_ij)^2. The outer problem is solved by bisection.
  const AllocationMatrix b = next.x + state.v;
  next.z.resize(N, n);
  for (Index j = 0; j < n; ++j) {
    const FacilitySpec& f = inst.facility(j);
    double bsum = 0.0;
    for (Index i = 0; i < N; ++i) bsum += b(i, j);
    const double s = nested_scalar_min(f.cost, f.lower, f.upper, bsum,
                                       rho / static_cast<double>(N));
    const double shift = (s - bsum) / static_cast<double>(N);
    for (Index i = 0; i < N; ++i) next.z(i, j) = b(i, j) + shift;
  }
  next.v = state.v + next.x - next.z;
  return next;
}

// ---------------------------------------------------------------------------
// Driver

std::string to_string(Termination t) {
  return t == Termination::kThreshold ? "threshold" : "iteration-limit";
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kDualDecomposition:
      return "dual";
    case Algorithm::kAdmmXFirst:
      return "admm1";
    case Algorithm::kAdmmYFirst:
      return "admm2";
    case Algorithm::kLinearizedAdmm:
      return "linearized";
  }
  return "unknown";
}

namespace {

double dual_decomposition_step_length(const SolverState& a,
                                      const SolverState& b) {
  return (b.x - a.x).squaredNorm() + (b.u - a.u).squaredNorm();
}

// Fault count for one iteration, recomputed from the policy so the step
// functions can stay pure.
Index count_faults(const FaultPolicy& p, Index k, Index N) {
  if (!(p.fail_prob > 0.0)) return 0;
  Index c = 0;
  for (Index i = 0; i < N; ++i) {
    if (p.faulted(static_cast<std::uint64_t>(k), i)) ++c;
  }
  return c;
}

}  // namespace

RunResult run(const ProblemInstance& inst, const RunOptions& options) {
  const Index N = inst.num_users();
  const Algorithm alg = options.algorithm;
  options.config.validate(alg, N);
  if (options.runtime.worker_count < 1) {
    throw ParameterError("worker_count must be >= 1");
  }
  const DualConvention conv = alg == Algorithm::kDualDecomposition
                                  ? DualConvention::kUnscaled
                                  : DualConvention::kScaled;
  const bool scaled = conv == DualConvention::kScaled;
  if (options.reference != nullptr && !scaled) {
    throw ParameterError("V^k is only defined for the scaled ADMM variants");
  }

  RunResult result;
  result.initial = options.initial
                       ? *options.initial
                       : initial_state(inst, conv, options.config.rho,
                                       options.config.dual_start);
  check_state(result.initial, inst, conv);
  if (options.reference != nullptr) {
    result.initial_vk = compute_Vk(result.initial, *options.reference);
  }

  SolverState cur = result.initial;
  const int rounds = options.runtime.plan.rounds_per_iteration();
  std::uint64_t comm = 0;
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();

  for (Index it = 0; it < options.config.max_iters; ++it) {
    result.total_faults += count_faults(options.runtime.faults, cur.k, N);
    SolverState next = step(alg, cur, inst, options.config, options.runtime);
    comm += static_cast<std::uint64_t>(rounds);

    MetricsRow row;
    row.iter = it + 1;
    row.objective = evaluate_objective(inst, next.x);
    row.dk = scaled ? compute_Dk(cur, next)
                    : dual_decomposition_step_length(cur, next);
    if (options.reference != nullptr) {
      row.vk = compute_Vk(next, *options.reference);
    }
    if (scaled) row.primal_residual = compute_primal_residual(next).from_z;
    row.coupling_residual = coupling_residual(next);
    row.comm_rounds = comm;
    if (options.record_timing) {
      row.wall_ms =
          std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    }
    result.trace.rows.push_back(row);
    if (options.observer) options.observer(row, next);
    cur = std::move(next);

    if (row.dk / static_cast<double>(N) < options.config.stop_threshold) {
      result.termination = Termination::kThreshold;
      break;
    }
  }
  result.final_state = std::move(cur);
  return result;
}

namespace {

constexpr double kReferenceFeasibilityTol = 1e-8;

// Largest of the x, y and coupling violations and max |x - z|.
double reference_violation(const ProblemInstance& inst, const SolverState& s) {
  const FeasibilityReport fr =
      check_feasibility(inst, s.x, s.y, kReferenceFeasibilityTol);
  // x_i - z_i = (u - u_prev) / N for every user
  const double xz = s.u_prev.size() > 0
                        ? (s.u - s.u_prev).cwiseAbs().maxCoeff() /
                              static_cast<double>(s.num_users())
                        : 0.0;
  return std::max({fr.max_x_violation, fr.max_y_violation,
                   fr.max_coupling_violation, xz});
}

}  // namespace

ReferenceSolution solve_reference(const ProblemInstance& inst, double rho,
                                  double threshold, Index max_iters) {
  SolverConfig config;
  config.rho = rho;
  config.max_iters = max_iters;
  config.stop_threshold = threshold;
  config.validate(Algorithm::kAdmmXFirst, inst.num_users());
  const double N = static_cast<double>(inst.num_users());

  // Stops once D^k/N is below the threshold and the iterate is feasible to
  // the cross-check tolerance; the second condition usually needs a few more
  // iterations than the first.
  SolverState s = initial_state(inst, DualConvention::kScaled, rho, config.dual_start);
  double dk_over_n = std::numeric_limits<double>::infinity();
  double violation = reference_violation(inst, s);
  bool reached = false;
  for (Index it = 0; it < max_iters; ++it) {
    SolverState next = step_admm1(s, inst, config);
    dk_over_n = compute_Dk(s, next) / N;
    s = std::move(next);
    violation = reference_violation(inst, s);
    if (dk_over_n < threshold && violation <= kReferenceFeasibilityTol) {
      reached = true;
      break;
    }
  }

  ReferenceSolution ref;
  ref.x_star = s.x;
  ref.z_star = s.z();
  ref.v_star = s.v();
  ref.p_star = evaluate_objective(inst, s.x);
  ref.iterations = s.k;
  ref.final_dk_over_n = dk_over_n;
  ref.max_violation = violation;
  ref.low_confidence = !reached;
  return ref;
}

}  // namespace mfra
