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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. All tolerances are pinned below.

#include <algorithm>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "mfra/diagnostics.hpp"
#include "mfra/errors.hpp"
#include "mfra/problems.hpp"
#include "mfra/solvers.hpp"
#include "mfra/subproblems.hpp"
#include "support.hpp"

using namespace mfra;
using mfra::testing::Rng;

namespace {

// 1: convergence speed
constexpr std::uint64_t kGlbSeed = 7;
constexpr Index kGlbFacilities = 10;
constexpr double kGlbRho = 1e-3;
constexpr double kSpeedThresholdScale = 1e-8;  // times (mean demand)^2
constexpr Index kSpeedMaxIters = 100;
constexpr double kSpeedSizeSpread = 0.20;
constexpr Index kSpeedHorizon = 400;  // run longer to report the actual count
// 2: monotone D^k and the V^0/(k+1) bound
constexpr double kMonotoneTol = 1e-12;
constexpr double kBoundTol = 1e-9;
// 3: linear rate
constexpr double kRateMinR2 = 0.95;
constexpr double kRateMinA = 1.0;
// 4: split-reformulation equivalence
constexpr int kEquivInstances = 6;
constexpr int kEquivIters = 20;
constexpr double kEquivTol = 1e-8;
// 5: replication
constexpr int kReplicas = 100;
constexpr Index kReplicaBaseUsers = 10;
constexpr Index kReplicaIters = 60;
constexpr Index kReplicaSkip = 5;
constexpr double kReplicaObjTol = 1e-2;
constexpr double kReplicaDkTol = 1e-6;
// 6: faults
constexpr Index kFaultUsers = 100;
constexpr std::uint64_t kFaultSeed = 2024;
constexpr Index kFaultIters = 400;
constexpr double kFaultMaxErr = 0.015;
constexpr Index kFaultProbeIter = 50;
constexpr double kFaultProbeErr = 0.005;
constexpr double kFaultFinalErr = 1e-4;
constexpr Index kFaultConvergeIters = 8000;  // converged runs stop on the speed threshold
// 7: dual decomposition oscillation
constexpr double kDualRho0 = 1e-5;
constexpr Index kDualIters = 400;
constexpr double kDualRatio = 100.0;
// 8: subproblems
constexpr int kProxCases = 200;
constexpr int kTopologyCases = 100;
constexpr double kLeftInverseTol = 1e-10;
// 9: determinism
constexpr Index kDeterminismUsers = 200;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double mean_demand(const GlbSpec& s) {
  double t = 0.0;
  for (const GlbUser& u : s.users) t += u.demand;
  return t / static_cast<double>(s.users.size());
}

RunResult run_alg(const ProblemInstance& inst, Algorithm a, double rho,
                  Index iters, double threshold, const ReferenceSolution* ref,
                  FaultPolicy faults = {}, Index workers = 1) {
  RunOptions o;
  o.algorithm = a;
  o.config.rho = rho;
  o.config.max_iters = iters;
  o.config.stop_threshold = threshold;
  o.reference = ref;
  o.runtime.faults = faults;
  o.runtime.worker_count = workers;
  return run(inst, o);
}

// ---------------------------------------------------------------------------

Verdict criterion_speed() {
  Index counts[2] = {-1, -1};
  std::string detail;
  const Index sizes[2] = {100, 1000};
  for (int s = 0; s < 2; ++s) {
    const GlbSpec spec = generate_random_glb(kGlbSeed, sizes[s], kGlbFacilities);
    const ProblemInstance inst = build_glb(spec);
    const double t = mean_demand(spec);
    const double thr = kSpeedThresholdScale * t * t;
    const RunResult r =
        run_alg(inst, Algorithm::kAdmmXFirst, kGlbRho, kSpeedHorizon, thr, nullptr);
    const double last = r.trace.rows.back().dk / static_cast<double>(sizes[s]);
    if (r.termination == Termination::kThreshold) counts[s] = r.final_state.k;
    double at100 = 0.0;
    if (static_cast<Index>(r.trace.rows.size()) >= kSpeedMaxIters) {
      at100 = r.trace.rows[kSpeedMaxIters - 1].dk / static_cast<double>(sizes[s]);
    }
    detail += fmt("N=%ld: iterations=%s threshold=%.3g D/N@100=%.3g D/N@end=%.3g; ",
                  static_cast<long>(sizes[s]),
                  counts[s] < 0 ? fmt(">%ld", static_cast<long>(kSpeedHorizon)).c_str()
                                : std::to_string(counts[s]).c_str(),
                  thr, at100, last);
  }
  bool pass = counts[0] > 0 && counts[1] > 0 && counts[0] <= kSpeedMaxIters &&
              counts[1] <= kSpeedMaxIters;
  if (pass) {
    const double spread = std::abs(static_cast<double>(counts[0] - counts[1])) /
                          static_cast<double>(std::max(counts[0], counts[1]));
    detail += fmt("spread=%.3f", spread);
    pass = spread <= kSpeedSizeSpread;
  }
  return {pass, detail};
}

struct BoundCheck {
  int runs = 0;
  long rows = 0;
  double worst_increase = -INFINITY;
  double worst_bound_gap = -INFINITY;
  bool ok = true;
};

void check_run_bounds(const ProblemInstance& inst, double rho,
                      const ReferenceSolution& ref, Index iters,
                      BoundCheck* acc) {
  const RunResult r =
      run_alg(inst, Algorithm::kAdmmXFirst, rho, iters, 0.0, &ref);
  const double v0 = *r.initial_vk;
  const auto& rows = r.trace.rows;
  for (size_t k = 0; k < rows.size(); ++k) {
    // rows[k].dk is D^k
    const double gap = rows[k].dk - v0 / static_cast<double>(k + 1);
    acc->worst_bound_gap = std::max(acc->worst_bound_gap, gap);
    if (gap > kBoundTol) acc->ok = false;
    if (k > 0) {
      const double inc = rows[k].dk - rows[k - 1].dk;
      acc->worst_increase = std::max(acc->worst_increase, inc);
      if (inc > kMonotoneTol) acc->ok = false;
    }
  }
  acc->runs += 1;
  acc->rows += static_cast<long>(rows.size());
}

Verdict criterion_monotone() {
  BoundCheck acc;
  Rng rng(31);
  for (int c = 0; c < 8; ++c) {
    const Index N = 1 + rng.pick(4);
    const Index n = 1 + rng.pick(3);
    const ProblemInstance inst = mfra::testing::random_tiny_instance(rng, N, n);
    const ReferenceSolution ref = solve_reference(inst, 1.0);
    check_run_bounds(inst, 1.0, ref, 200, &acc);
  }
  {
    const ProblemInstance inst = build_glb(generate_random_glb(kGlbSeed, 50, kGlbFacilities));
    const ReferenceSolution ref = solve_reference(inst, kGlbRho, kReferenceThreshold, 20000);
    check_run_bounds(inst, kGlbRho, ref, 400, &acc);
  }
  return {acc.ok, fmt("runs=%d rows=%ld max(D^{k+1}-D^k)=%.3g max(D^k-V0/(k+1))=%.3g",
                      acc.runs, acc.rows, acc.worst_increase, acc.worst_bound_gap)};
}

// Strictly convex quadratic costs, and strictly concave separable
// quadratic utilities with linear costs.
ProblemInstance convex_cost_instance() {
  Rng rng(5);
  const Index N = 20, n = 4;
  std::vector<UserSpec> users;
  double total = 0.0;
  for (Index i = 0; i < N; ++i) {
    const double t = rng.uniform(0.5, 1.5);
    total += t;
    users.push_back({ConcaveUtility::quadratic_latency(
                         1.0, t, mfra::testing::random_vector(rng, n, 0.05, 0.1)),
                     FeasibleSet::scaled_simplex(t)});
  }
  std::vector<FacilitySpec> fac;
  for (Index j = 0; j < n; ++j) {
    fac.push_back({ConvexCost::quadratic(rng.uniform(0.05, 0.2), rng.uniform(0.1, 0.5)),
                   0.0, total});
  }
  return ProblemInstance(users, fac);
}

ProblemInstance concave_utility_instance() {
  Rng rng(6);
  const Index N = 20, n = 4;
  std::vector<UserSpec> users;
  for (Index i = 0; i < N; ++i) {
    users.push_back({ConcaveUtility::separable_quadratic(
                         mfra::testing::random_vector(rng, n, 0.5, 1.5),
                         mfra::testing::random_vector(rng, n, 1.0, 3.0)),
                     FeasibleSet::box(Vector::Zero(n), Vector::Constant(n, 3.0))});
  }
  std::vector<FacilitySpec> fac;
  for (Index j = 0; j < n; ++j) {
    fac.push_back({ConvexCost::linear(rng.uniform(0.2, 1.0)), 0.0,
                   rng.uniform(10.0, 30.0)});
  }
  return ProblemInstance(users, fac);
}

Verdict rate_case(const ProblemInstance& inst, Algorithm alg, double rho,
                  const char* name) {
  const ReferenceSolution ref = solve_reference(inst, rho, 1e-24);
  const RunResult r = run_alg(inst, alg, rho, 5000, 1e-12, &ref);
  std::vector<double> vk;
  for (const MetricsRow& row : r.trace.rows) vk.push_back(*row.vk);
  Index k1 = static_cast<Index>(vk.size()) - 1;
  while (k1 > 0 && !(vk[static_cast<size_t>(k1)] > 0.0)) --k1;
  if (k1 < 9) {
    return {false, fmt("%s: window too short (%ld rows)", name, static_cast<long>(k1 + 1))};
  }
  const RateFit fit = fit_rate(vk, 0, k1, RateModel::kGeometric);
  const bool pass = fit.r_squared >= kRateMinR2 && fit.a > kRateMinA;
  return {pass, fmt("%s: window=[0,%ld] R2=%.4f a=%.5f ref_low_confidence=%d",
                    name, static_cast<long>(k1), fit.r_squared, fit.a,
                    ref.low_confidence ? 1 : 0)};
}

Verdict criterion_linear_rate() {
  const Verdict a = rate_case(convex_cost_instance(), Algorithm::kAdmmXFirst, 1.0, "quadratic-cost/admm1");
  const Verdict b = rate_case(concave_utility_instance(), Algorithm::kAdmmYFirst, 1.0, "concave-utility/admm2");
  return {a.pass && b.pass, a.detail + "; " + b.detail};
}

Verdict criterion_equivalence() {
  Rng rng(404);
  double worst = 0.0;
  int done = 0;
  SolverConfig cfg;
  cfg.rho = 1.0;
  while (done < kEquivInstances) {
    const Index N = 1 + rng.pick(3);
    const Index n = 1 + rng.pick(2);
    const ProblemInstance inst = mfra::testing::random_tiny_instance(rng, N, n);
    SolverState s = initial_state(inst, DualConvention::kScaled, cfg.rho);
    ReformulationState ref = reformulation_from(s);
    for (int k = 0; k < kEquivIters; ++k) {
      s = step_admm1(s, inst, cfg);
      ref = step_reference_reformulation(ref, inst, cfg);
      const Vector u_ref = ref.v.colwise().sum().transpose();
      const Vector y_ref = ref.z.colwise().sum().transpose();
      worst = std::max({worst, (s.x - ref.x).cwiseAbs().maxCoeff(),
                        (s.u - u_ref).cwiseAbs().maxCoeff(),
                        (s.y - y_ref).cwiseAbs().maxCoeff(),
                        (s.z() - ref.z).cwiseAbs().maxCoeff()});
    }
    ++done;
  }
  return {worst <= kEquivTol,
          fmt("instances=%d iterations=%d max|diff|=%.3g", done, kEquivIters, worst)};
}

Verdict criterion_replication() {
  const GlbSpec base = generate_random_glb(kGlbSeed, kReplicaBaseUsers, kGlbFacilities);
  const ProblemInstance b = build_glb(base);
  const ProblemInstance m = build_glb(replicate_glb(base, kReplicas));
  const RunResult rb = run_alg(b, Algorithm::kAdmmXFirst, kGlbRho, kReplicaIters, 0.0, nullptr);
  const RunResult rm = run_alg(m, Algorithm::kAdmmXFirst, kGlbRho, kReplicaIters, 0.0, nullptr);
  double obj_err = 0.0, dk_err = 0.0;
  for (size_t k = 0; k < rb.trace.rows.size(); ++k) {
    const double scale = static_cast<double>(kReplicas);
    const double eo = std::abs(rm.trace.rows[k].objective / (scale * rb.trace.rows[k].objective) - 1.0);
    const double ed = std::abs(rm.trace.rows[k].dk / (scale * rb.trace.rows[k].dk) - 1.0);
    if (static_cast<Index>(k) + 1 > kReplicaSkip) obj_err = std::max(obj_err, eo);
    dk_err = std::max(dk_err, ed);
  }
  return {obj_err <= kReplicaObjTol && dk_err <= kReplicaDkTol,
          fmt("m=%d base N=%ld iterations=%ld max rel err objective=%.3g Dk=%.3g",
              kReplicas, static_cast<long>(kReplicaBaseUsers),
              static_cast<long>(kReplicaIters), obj_err, dk_err)};
}

Verdict criterion_faults() {
  const ProblemInstance inst = build_glb(generate_random_glb(kGlbSeed, kFaultUsers, kGlbFacilities));
  const RunResult base = run_alg(inst, Algorithm::kAdmmXFirst, kGlbRho, kFaultIters, 0.0, nullptr);
  const double t = mean_demand(generate_random_glb(kGlbSeed, kFaultUsers, kGlbFacilities));
  const double thr = kSpeedThresholdScale * t * t;
  const RunResult base_conv =
      run_alg(inst, Algorithm::kAdmmXFirst, kGlbRho, kFaultConvergeIters, thr, nullptr);
  bool pass = base_conv.termination == Termination::kThreshold;
  std::string detail = fmt("fault-free converged in %ld; ", static_cast<long>(base_conv.final_state.k));
  for (double p : {0.05, 0.10}) {
    FaultPolicy fp;
    fp.fail_prob = p;
    fp.seed = kFaultSeed;
    const RunResult f = run_alg(inst, Algorithm::kAdmmXFirst, kGlbRho, kFaultIters, 0.0, nullptr, fp);
    double max_err = 0.0, probe = 0.0;
    for (size_t k = 0; k < base.trace.rows.size(); ++k) {
      const double e = std::abs(f.trace.rows[k].objective / base.trace.rows[k].objective - 1.0);
      max_err = std::max(max_err, e);
      if (static_cast<Index>(k) + 1 == kFaultProbeIter) probe = e;
    }
    const RunResult fc =
        run_alg(inst, Algorithm::kAdmmXFirst, kGlbRho, kFaultConvergeIters, thr, nullptr, fp);
    const double fin = std::abs(fc.trace.rows.back().objective / base_conv.trace.rows.back().objective - 1.0);
    const bool ok = max_err <= kFaultMaxErr && probe <= kFaultProbeErr && fin <= kFaultFinalErr &&
                    fc.termination == Termination::kThreshold;
    pass = pass && ok;
    detail += fmt("p=%.2f faults@%ld=%ld max=%.4g @%ld=%.4g converged(%ld its)=%.3g; ", p,
                  static_cast<long>(kFaultIters), static_cast<long>(f.total_faults), max_err,
                  static_cast<long>(kFaultProbeIter), probe,
                  static_cast<long>(fc.final_state.k), fin);
  }
  return {pass, detail};
}

Verdict criterion_dual_oscillation() {
  const ProblemInstance inst = build_glb(generate_random_glb(kGlbSeed, 100, kGlbFacilities));
  const RunResult admm = run_alg(inst, Algorithm::kAdmmXFirst, kGlbRho, kDualIters, 0.0, nullptr);
  RunOptions o;
  o.algorithm = Algorithm::kDualDecomposition;
  o.config.rho = kDualRho0;
  o.config.max_iters = kDualIters;
  o.config.stop_threshold = 0.0;
  o.config.dual_step_rule = StepRule::kDiminishing;
  const RunResult dual = run(inst, o);
  const double dres = dual.trace.rows.back().coupling_residual;
  const double ares = *admm.trace.rows.back().primal_residual;
  const double ratio = dres / ares;
  return {ratio >= kDualRatio,
          fmt("iter %ld: dual coupling residual=%.4g admm primal residual=%.4g ratio=%.4g",
              static_cast<long>(kDualIters), dres, ares, ratio)};
}

// ---- 8 ----

struct ProxCaseResult {
  bool ok;
  double err;
  double step;
};

ProxCaseResult user_case(Rng& rng, int kind) {
  const double rho = 1.0;
  const Index d = 1 + rng.pick(3);
  const double step = d == 1 ? 1e-4 : (d == 2 ? 2e-3 : 1e-2);
  Vector anchor = mfra::testing::random_vector(rng, d, -0.5, 2.0);
  ConcaveUtility f;
  FeasibleSet set;
  GridDomain dom;
  switch (kind) {
    case 0: {  // latency on the simplex, curvature kept below rho / 3
      const double t = rng.uniform(0.5, 2.0);
      const Vector l = mfra::testing::random_vector(rng, d, 0.05, 0.5);
      const double q = rng.uniform(0.1, 1.0) * t * rho / (6.0 * l.squaredNorm());
      f = ConcaveUtility::quadratic_latency(q, t, l);
      set = FeasibleSet::scaled_simplex(t);
      dom = GridSimplex{d, t};
      break;
    }
    case 1: {  // separable quadratic on a box
      const Vector hi = mfra::testing::random_vector(rng, d, 0.5, 2.0);
      f = ConcaveUtility::separable_quadratic(
          mfra::testing::random_vector(rng, d, 0.1, 3.0),
          mfra::testing::random_vector(rng, d, -1.0, 2.0));
      set = FeasibleSet::box(Vector::Zero(d), hi);
      dom = GridBox{Vector::Zero(d), hi};
      break;
    }
    case 2: {  // log-rate on a capped orthant
      const Vector hi = mfra::testing::random_vector(rng, d, 0.5, 2.0);
      f = ConcaveUtility::log_rate(rng.uniform(0.2, 3.0), DenseMatrix::Identity(d, d));
      set = FeasibleSet::nonneg_cap(hi);
      dom = GridBox{Vector::Zero(d), hi};
      break;
    }
    default: {  // latency on a box (generic projected-gradient path)
      const Vector hi = mfra::testing::random_vector(rng, d, 0.5, 2.0);
      const Vector l = mfra::testing::random_vector(rng, d, 0.05, 0.5);
      const double q = rng.uniform(0.1, 1.0) * rho / (6.0 * l.squaredNorm());
      f = ConcaveUtility::quadratic_latency(q, 1.0, l);
      set = FeasibleSet::box(Vector::Zero(d), hi);
      dom = GridBox{Vector::Zero(d), hi};
      break;
    }
  }
  const Vector x = prox_user(f, set, anchor, rho).minimizer;
  const Vector g = brute_force_minimize(
      [&](const Vector& p) { return -f.value(p) + 0.5 * rho * (p - anchor).squaredNorm(); },
      dom, step);
  const double err = (x - g).cwiseAbs().maxCoeff();
  return {err <= step * (1.0 + 1e-9), err, step};
}

// Disjoint paths over a few links, so the path-coordinate problem separates.
ProxCaseResult path_case(Rng& rng) {
  const double rho = 1.0;
  const Index paths = 1 + rng.pick(2);
  std::vector<std::vector<Index>> p;
  Index link = 0;
  for (Index k = 0; k < paths; ++k) {
    const Index len = 1 + rng.pick(2);
    std::vector<Index> path;
    for (Index s = 0; s < len; ++s) path.push_back(link++);
    p.push_back(path);
  }
  const TopologyMatrix A = make_topology(link, p);
  const Vector cap = mfra::testing::random_vector(rng, paths, 0.5, 2.0);
  const ConcaveUtility f = ConcaveUtility::log_rate(rng.uniform(0.2, 3.0), A.left_inverse);
  const FeasibleSet set = FeasibleSet::path_image(A.entries, cap);
  const Vector anchor = mfra::testing::random_vector(rng, link, -0.5, 2.0);
  const Vector x = prox_user(f, set, anchor, rho).minimizer;
  const double step = paths == 1 ? 1e-4 : 2e-3;
  const Vector w = brute_force_minimize(
      [&](const Vector& wv) {
        const Vector xv = A.entries * wv;
        return -f.value(xv) + 0.5 * rho * (xv - anchor).squaredNorm();
      },
      GridBox{Vector::Zero(paths), cap}, step);
  const double err = (A.left_inverse * x - w).cwiseAbs().maxCoeff();
  return {err <= step * (1.0 + 1e-9), err, step};
}

ProxCaseResult facility_case(Rng& rng) {
  const double lo = rng.uniform(0.0, 0.5);
  const double hi = lo + rng.uniform(0.5, 3.0);
  ConvexCost g;
  switch (rng.pick(4)) {
    case 0: g = ConvexCost::linear(rng.uniform(-1.0, 2.0)); break;
    case 1: g = ConvexCost::quadratic(rng.uniform(0.1, 2.0), rng.uniform(-1.0, 1.0)); break;
    case 2: {
      EnergyCost e;
      e.energy_price = rng.uniform(0.1, 1.0);
      e.pue = 1.5;
      e.idle_power = 0.5;
      e.peak_power = 0.5 + rng.uniform(0.1, 1.0);
      e.servers = hi;
      g = ConvexCost::energy(e);
      break;
    }
    default: {
      const double b = rng.uniform(0.1, 0.6);
      g = ConvexCost::piecewise_linear({lo + 0.3 * (hi - lo), lo + 0.7 * (hi - lo)},
                                       {b, 3 * b, 6 * b});
    }
  }
  const double anchor = rng.uniform(lo - 1.0, hi + 1.0);
  const double w = rng.uniform(0.2, 3.0);
  const double y = prox_facility(g, lo, hi, anchor, w).minimizer;
  const double step = 1e-4;
  const Vector best = brute_force_minimize(
      [&](const Vector& p) { return g.value(p[0]) + 0.5 * w * (p[0] - anchor) * (p[0] - anchor); },
      GridBox{Vector::Constant(1, lo), Vector::Constant(1, hi)}, step);
  const double err = std::abs(y - best[0]);
  return {err <= step * (1.0 + 1e-9), err, step};
}

Verdict criterion_subproblems() {
  Rng rng(8080);
  int fails = 0;
  double worst_ratio = 0.0;
  for (int c = 0; c < kProxCases; ++c) {
    ProxCaseResult r;
    const int kind = c % 6;
    if (kind < 4) {
      r = user_case(rng, kind);
    } else if (kind == 4) {
      r = path_case(rng);
    } else {
      r = facility_case(rng);
    }
    if (!r.ok) ++fails;
    worst_ratio = std::max(worst_ratio, r.err / r.step);
  }
  // Topology left-inverses.
  double worst_li = 0.0;
  int li_cases = 0;
  {
    DenseMatrix two_path(3, 2);
    two_path << 1, 0, 1, 0, 0, 1;
    DenseMatrix alt_inv(2, 3);
    alt_inv << 1, 0, 0, 0, 0, 1;
    const DenseMatrix eye = DenseMatrix::Identity(2, 2);
    worst_li = std::max(worst_li, (topology_left_inverse(two_path) * two_path - eye).cwiseAbs().maxCoeff());
    worst_li = std::max(worst_li, (alt_inv * two_path - eye).cwiseAbs().maxCoeff());
    ++li_cases;
  }
  Rng trng(99);
  while (li_cases < kTopologyCases + 1) {
    const Index links = 2 + trng.pick(7);
    const Index paths = 1 + trng.pick(static_cast<int>(links));
    DenseMatrix a(links, paths);
    for (Index r = 0; r < links; ++r)
      for (Index c = 0; c < paths; ++c) a(r, c) = trng.uniform() < 0.5 ? 1.0 : 0.0;
    Eigen::FullPivLU<DenseMatrix> lu(a);
    if (lu.rank() < paths) continue;
    const DenseMatrix li = topology_left_inverse(a);
    worst_li = std::max(worst_li,
                        (li * a - DenseMatrix::Identity(paths, paths)).cwiseAbs().maxCoeff());
    ++li_cases;
  }
  const bool pass = fails == 0 && worst_li <= kLeftInverseTol;
  return {pass, fmt("prox cases=%d failures=%d worst err/cell=%.3f; topology cases=%d "
                    "(incl. the two-path example) max|A+A-I|=%.3g",
                    kProxCases, fails, worst_ratio, li_cases, worst_li)};
}

std::string trace_csv(const RunResult& r) {
  std::ostringstream ss;
  write_trace_csv(ss, r.trace);
  return ss.str();
}

Verdict criterion_determinism() {
  const ProblemInstance inst = build_glb(generate_random_glb(kGlbSeed, kDeterminismUsers, kGlbFacilities));
  int compared = 0;
  bool same = true;
  for (Algorithm a : {Algorithm::kAdmmXFirst, Algorithm::kAdmmYFirst, Algorithm::kDualDecomposition}) {
    for (double p : {0.0, 0.1}) {
      FaultPolicy fp;
      fp.fail_prob = p;
      fp.seed = 17;
      const double rho = a == Algorithm::kDualDecomposition ? kDualRho0 : kGlbRho;
      const std::string t1 = trace_csv(run_alg(inst, a, rho, 60, 0.0, nullptr, fp, 1));
      const std::string t1b = trace_csv(run_alg(inst, a, rho, 60, 0.0, nullptr, fp, 1));
      const std::string t4 = trace_csv(run_alg(inst, a, rho, 60, 0.0, nullptr, fp, 4));
      same = same && t1 == t1b && t1 == t4;
      compared += 2;
    }
  }
  return {same, fmt("trace pairs compared=%d (threads 1 vs 1, 1 vs 4; fault-free and p=0.1) %s",
                    compared, same ? "all byte-identical" : "MISMATCH")};
}

}  // namespace

int main() {
  struct Item {
    int id;
    const char* name;
    std::function<Verdict()> check;
  };
  const std::vector<Item> items = {
      {1, "convergence speed", criterion_speed},
      {2, "monotone D^k and V0/(k+1) bound", criterion_monotone},
      {3, "linear rate (strongly convex costs, strictly concave utilities)", criterion_linear_rate},
      {4, "split-reformulation equivalence", criterion_equivalence},
      {5, "replication proportionality", criterion_replication},
      {6, "fault tolerance", criterion_faults},
      {7, "dual decomposition oscillation", criterion_dual_oscillation},
      {8, "subproblem oracles and left-inverses", criterion_subproblems},
      {9, "determinism across runs and threads", criterion_determinism},
  };
  int failed = 0;
  for (const Item& it : items) {
    Verdict v;
    try {
      v = it.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %d %s: %s\n", v.pass ? "PASS" : "FAIL", it.id, it.name, v.detail.c_str());
    std::fflush(stdout);
    if (!v.pass) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(items.size()) - failed, items.size());
  return failed == 0 ? 0 : 1;
}
