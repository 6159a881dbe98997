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

#include "mfra/mfra.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <optional>
#include <sstream>
#include <string>

#include "mfra/errors.hpp"
#include "mfra/problems.hpp"
#include "mfra/serialization.hpp"
#include "mfra/solvers.hpp"

struct mfra_instance {
  mfra::ProblemInstance inst;
};

struct mfra_reference {
  mfra::ReferenceSolution ref;
};

struct mfra_run {
  mfra::RunResult result;
  double initial_objective = 0.0;  // reported when the trace is empty
};

namespace {

thread_local std::string g_last_error;

int fail(int status, const std::string& msg) {
  g_last_error = msg;
  return status;
}

// Runs f and maps library exceptions onto status codes.
template <class F>
int guard(F&& f) {
  try {
    g_last_error.clear();
    f();
    return MFRA_OK;
  } catch (const mfra::ShapeError& e) {
    return fail(MFRA_ERR_SHAPE, e.what());
  } catch (const mfra::DomainError& e) {
    return fail(MFRA_ERR_DOMAIN, e.what());
  } catch (const mfra::ParameterError& e) {
    return fail(MFRA_ERR_PARAMETER, e.what());
  } catch (const mfra::BuildError& e) {
    return fail(MFRA_ERR_BUILD, e.what());
  } catch (const mfra::UnsupportedError& e) {
    return fail(MFRA_ERR_UNSUPPORTED, e.what());
  } catch (const mfra::ParseError& e) {
    return fail(MFRA_ERR_PARSE, e.what());
  } catch (const mfra::IoError& e) {
    return fail(MFRA_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(MFRA_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MFRA_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(MFRA_ERR_INTERNAL, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

#define MFRA_REQUIRE(cond, what) \
  if (!(cond)) return fail(MFRA_ERR_INVALID_ARGUMENT, what)

int wrap_instance(mfra::ProblemInstance inst, mfra_instance** out) {
  *out = new mfra_instance{std::move(inst)};
  return MFRA_OK;
}

}  // namespace

extern "C" {

const char* mfra_version(void) { return "0.1.0"; }

const char* mfra_last_error(void) { return g_last_error.c_str(); }

const char* mfra_status_name(int status) {
  switch (status) {
    case MFRA_OK: return "ok";
    case MFRA_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case MFRA_ERR_SHAPE: return "shape";
    case MFRA_ERR_DOMAIN: return "domain";
    case MFRA_ERR_PARAMETER: return "parameter";
    case MFRA_ERR_BUILD: return "build";
    case MFRA_ERR_UNSUPPORTED: return "unsupported";
    case MFRA_ERR_PARSE: return "parse";
    case MFRA_ERR_IO: return "io";
    default: return "internal";
  }
}

void mfra_string_free(char* s) { std::free(s); }

int mfra_instance_load(const char* path, mfra_instance** out) {
  MFRA_REQUIRE(path != nullptr && out != nullptr, "null argument");
  return guard([&] {
    wrap_instance(mfra::instance_from_json(mfra::read_text_file(path)), out);
  });
}

int mfra_instance_from_json(const char* text, mfra_instance** out) {
  MFRA_REQUIRE(text != nullptr && out != nullptr, "null argument");
  return guard([&] { wrap_instance(mfra::instance_from_json(text), out); });
}

int mfra_instance_save(const mfra_instance* inst, const char* path) {
  MFRA_REQUIRE(inst != nullptr && path != nullptr, "null argument");
  return guard([&] {
    mfra::write_text_file(path, mfra::instance_to_json(inst->inst, 1) + "\n");
  });
}

int mfra_instance_to_json(const mfra_instance* inst, char** out_text) {
  MFRA_REQUIRE(inst != nullptr && out_text != nullptr, "null argument");
  return guard([&] { *out_text = dup_string(mfra::instance_to_json(inst->inst)); });
}

int mfra_instance_generate_glb(uint64_t seed, int64_t num_users,
                               int64_t num_facilities, double capacity_ratio,
                               double q, int64_t copies, mfra_instance** out) {
  MFRA_REQUIRE(out != nullptr, "null argument");
  MFRA_REQUIRE(num_users >= 1 && num_facilities >= 1, "need N, n >= 1");
  MFRA_REQUIRE(capacity_ratio >= 1.0, "capacity_ratio must be >= 1");
  MFRA_REQUIRE(copies >= 1, "copies must be >= 1");
  return guard([&] {
    mfra::GlbSpec spec = mfra::generate_random_glb(seed, num_users,
                                                   num_facilities,
                                                   capacity_ratio, q);
    if (copies > 1) spec = mfra::replicate_glb(spec, static_cast<int>(copies));
    wrap_instance(mfra::build_glb(spec), out);
  });
}

int mfra_instance_from_glb_json(const char* text, mfra_instance** out) {
  MFRA_REQUIRE(text != nullptr && out != nullptr, "null argument");
  return guard([&] {
    wrap_instance(mfra::build_glb(mfra::glb_spec_from_json(text)), out);
  });
}

int mfra_instance_from_te_json(const char* text, mfra_instance** out) {
  MFRA_REQUIRE(text != nullptr && out != nullptr, "null argument");
  return guard([&] {
    wrap_instance(mfra::build_te(mfra::te_spec_from_json(text)), out);
  });
}

int mfra_instance_get_summary(const mfra_instance* inst,
                              mfra_instance_summary* out) {
  MFRA_REQUIRE(inst != nullptr && out != nullptr, "null argument");
  return guard([&] {
    const mfra::ProblemInstance& p = inst->inst;
    mfra_instance_summary s{};
    s.num_users = p.num_users();
    s.num_facilities = p.num_facilities();
    int64_t simplex_users = 0;
    for (const mfra::UserSpec& u : p.users()) {
      if (const auto* sx = std::get_if<mfra::ScaledSimplex>(&u.feasible.kind())) {
        s.total_demand += sx->total;
        ++simplex_users;
      }
    }
    for (const mfra::FacilitySpec& f : p.facilities()) s.total_capacity += f.upper;
    s.mean_demand = simplex_users > 0
                        ? s.total_demand / static_cast<double>(simplex_users)
                        : 0.0;
    *out = s;
  });
}

int mfra_instance_evaluate(const mfra_instance* inst, const double* x,
                           size_t len, double* out_objective) {
  MFRA_REQUIRE(inst != nullptr && x != nullptr && out_objective != nullptr,
               "null argument");
  const auto N = inst->inst.num_users();
  const auto n = inst->inst.num_facilities();
  MFRA_REQUIRE(len == static_cast<size_t>(N * n), "x must hold N * n values");
  return guard([&] {
    mfra::AllocationMatrix m =
        Eigen::Map<const mfra::AllocationMatrix>(x, N, n);
    *out_objective = mfra::evaluate_objective(inst->inst, m);
  });
}

void mfra_instance_free(mfra_instance* inst) { delete inst; }

int mfra_reference_solve(const mfra_instance* inst, double rho,
                         double threshold, int64_t max_iters,
                         mfra_reference** out) {
  MFRA_REQUIRE(inst != nullptr && out != nullptr, "null argument");
  return guard([&] {
    const double thr = threshold > 0.0 ? threshold : mfra::kReferenceThreshold;
    const int64_t iters = max_iters > 0 ? max_iters : mfra::kReferenceMaxIters;
    *out = new mfra_reference{mfra::solve_reference(inst->inst, rho, thr, iters)};
  });
}

int mfra_reference_get_summary(const mfra_reference* ref,
                               mfra_reference_summary* out) {
  MFRA_REQUIRE(ref != nullptr && out != nullptr, "null argument");
  out->p_star = ref->ref.p_star;
  out->iterations = ref->ref.iterations;
  out->final_dk_over_n = ref->ref.final_dk_over_n;
  out->max_violation = ref->ref.max_violation;
  out->low_confidence = ref->ref.low_confidence ? 1 : 0;
  return MFRA_OK;
}

void mfra_reference_free(mfra_reference* ref) { delete ref; }

void mfra_solver_options_default(mfra_solver_options* opts) {
  if (opts == nullptr) return;
  const mfra::SolverConfig c;
  opts->algorithm = MFRA_ALG_ADMM1;
  opts->rho = c.rho;
  opts->max_iters = c.max_iters;
  opts->stop_threshold = c.stop_threshold;
  opts->diminishing_step = 1;
  opts->linearized_r = 0.0;
  opts->threads = 1;
  opts->aggregation = MFRA_AGG_REDUCE_BROADCAST;
  opts->fail_prob = 0.0;
  opts->seed = 0;
  opts->record_timing = 0;
}

int mfra_solve(const mfra_instance* inst, const mfra_solver_options* opts,
               const mfra_reference* ref, mfra_run** out) {
  MFRA_REQUIRE(inst != nullptr && opts != nullptr && out != nullptr,
               "null argument");
  MFRA_REQUIRE(opts->algorithm >= MFRA_ALG_DUAL &&
                   opts->algorithm <= MFRA_ALG_LINEARIZED,
               "unknown algorithm");
  MFRA_REQUIRE(opts->aggregation == MFRA_AGG_REDUCE_BROADCAST ||
                   opts->aggregation == MFRA_AGG_ALLREDUCE,
               "unknown aggregation mode");
  MFRA_REQUIRE(opts->threads >= 1, "threads must be >= 1");
  MFRA_REQUIRE(opts->fail_prob >= 0.0 && opts->fail_prob <= 1.0,
               "fail_prob must lie in [0, 1]");
  return guard([&] {
    mfra::RunOptions o;
    o.algorithm = static_cast<mfra::Algorithm>(opts->algorithm);
    o.config.rho = opts->rho;
    o.config.max_iters = opts->max_iters;
    o.config.stop_threshold = opts->stop_threshold;
    o.config.dual_step_rule = opts->diminishing_step
                                  ? mfra::StepRule::kDiminishing
                                  : mfra::StepRule::kConstant;
    o.config.linearized_r = opts->linearized_r;
    o.runtime.worker_count = opts->threads;
    o.runtime.plan.mode = opts->aggregation == MFRA_AGG_ALLREDUCE
                              ? mfra::AggregationMode::kAllreduce
                              : mfra::AggregationMode::kReduceBroadcast;
    o.runtime.plan.shard_count = opts->threads;
    o.runtime.faults.fail_prob = opts->fail_prob;
    o.runtime.faults.seed = opts->seed;
    o.record_timing = opts->record_timing != 0;
    o.reference = ref != nullptr ? &ref->ref : nullptr;
    auto r = std::make_unique<mfra_run>();
    r->result = mfra::run(inst->inst, o);
    r->initial_objective =
        mfra::evaluate_objective(inst->inst, r->result.initial.x);
    *out = r.release();
  });
}

int mfra_run_get_summary(const mfra_run* run, mfra_run_summary* out) {
  MFRA_REQUIRE(run != nullptr && out != nullptr, "null argument");
  const mfra::RunResult& r = run->result;
  mfra_run_summary s{};
  s.final_objective = run->initial_objective;
  s.iterations = static_cast<int64_t>(r.trace.rows.size());
  s.termination = r.termination == mfra::Termination::kThreshold
                      ? MFRA_TERM_THRESHOLD
                      : MFRA_TERM_ITERATION_LIMIT;
  if (!r.trace.rows.empty()) {
    const mfra::MetricsRow& last = r.trace.rows.back();
    s.final_objective = last.objective;
    s.final_dk = last.dk;
    s.has_primal_residual = last.primal_residual.has_value() ? 1 : 0;
    s.final_primal_residual = last.primal_residual.value_or(0.0);
    s.final_coupling_residual = last.coupling_residual;
    s.comm_rounds = last.comm_rounds;
  }
  s.total_faults = r.total_faults;
  s.has_initial_vk = r.initial_vk.has_value() ? 1 : 0;
  s.initial_vk = r.initial_vk.value_or(0.0);
  *out = s;
  return MFRA_OK;
}

int mfra_run_trace_length(const mfra_run* run, int64_t* out) {
  MFRA_REQUIRE(run != nullptr && out != nullptr, "null argument");
  *out = static_cast<int64_t>(run->result.trace.rows.size());
  return MFRA_OK;
}

int mfra_run_trace_row(const mfra_run* run, int64_t index, mfra_trace_row* out) {
  MFRA_REQUIRE(run != nullptr && out != nullptr, "null argument");
  const auto& rows = run->result.trace.rows;
  MFRA_REQUIRE(index >= 0 && index < static_cast<int64_t>(rows.size()),
               "trace index out of range");
  const mfra::MetricsRow& r = rows[static_cast<size_t>(index)];
  out->iter = r.iter;
  out->objective = r.objective;
  out->dk = r.dk;
  out->has_vk = r.vk.has_value() ? 1 : 0;
  out->vk = r.vk.value_or(0.0);
  out->has_primal_residual = r.primal_residual.has_value() ? 1 : 0;
  out->primal_residual = r.primal_residual.value_or(0.0);
  out->coupling_residual = r.coupling_residual;
  out->comm_rounds = r.comm_rounds;
  out->has_wall_ms = r.wall_ms.has_value() ? 1 : 0;
  out->wall_ms = r.wall_ms.value_or(0.0);
  return MFRA_OK;
}

int mfra_run_csv(const mfra_run* run, char** out_text) {
  MFRA_REQUIRE(run != nullptr && out_text != nullptr, "null argument");
  return guard([&] {
    std::ostringstream ss;
    mfra::write_trace_csv(ss, run->result.trace);
    *out_text = dup_string(ss.str());
  });
}

int mfra_run_write_csv(const mfra_run* run, const char* path) {
  MFRA_REQUIRE(run != nullptr && path != nullptr, "null argument");
  return guard([&] {
    std::ostringstream ss;
    mfra::write_trace_csv(ss, run->result.trace);
    mfra::write_text_file(path, ss.str());
  });
}

int mfra_run_final_x(const mfra_run* run, double* x, size_t len) {
  MFRA_REQUIRE(run != nullptr && x != nullptr, "null argument");
  const mfra::AllocationMatrix& m = run->result.final_state.x;
  MFRA_REQUIRE(len == static_cast<size_t>(m.size()), "x must hold N * n values");
  std::memcpy(x, m.data(), sizeof(double) * static_cast<size_t>(m.size()));
  return MFRA_OK;
}

void mfra_run_free(mfra_run* run) { delete run; }

}  // extern "C"
