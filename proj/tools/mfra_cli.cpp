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

// Command-line front end. Talks to the library only through mfra.h.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mfra/mfra.h"

namespace {

struct Failure {
  int status;
  std::string message;
};

void check(int status, const char* what) {
  if (status != MFRA_OK) {
    throw Failure{status, std::string(what) + ": " + mfra_status_name(status) +
                              ": " + mfra_last_error()};
  }
}

struct InstanceDeleter {
  void operator()(mfra_instance* p) const { mfra_instance_free(p); }
};
struct RunDeleter {
  void operator()(mfra_run* p) const { mfra_run_free(p); }
};
struct ReferenceDeleter {
  void operator()(mfra_reference* p) const { mfra_reference_free(p); }
};
using InstancePtr = std::unique_ptr<mfra_instance, InstanceDeleter>;
using RunPtr = std::unique_ptr<mfra_run, RunDeleter>;
using ReferencePtr = std::unique_ptr<mfra_reference, ReferenceDeleter>;

// Generator flags shared by every subcommand that can build its own instance.
struct GenParams {
  int64_t users = 100;
  int64_t facilities = 10;
  uint64_t seed = 7;
  double capacity_ratio = 1.4;
  double q = 40.0;
  int64_t copies = 1;
};

struct SolveParams {
  std::string instance;
  std::string algorithm = "admm1";
  double rho = 1e-3;
  double rho0 = 1e-5;
  bool constant_step = false;
  double linearized_r = 0.0;
  int64_t max_iters = 400;
  double tol = 1e-8;
  bool tol_relative = false;
  uint64_t seed = 0;
  double fail_prob = 0.0;
  int64_t threads = 1;
  std::string agg = "reduce";
  std::string out;
  bool reference = false;
  bool timing = false;
};

void add_gen_flags(CLI::App* cmd, GenParams& g) {
  cmd->add_option("--users,-N", g.users, "number of users")->check(CLI::PositiveNumber);
  cmd->add_option("--facilities,-n", g.facilities, "number of facilities")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--gen-seed", g.seed, "generator seed");
  cmd->add_option("--capacity-ratio", g.capacity_ratio, "total capacity / total demand")
      ->check(CLI::Range(1.0, 1e9));
  cmd->add_option("--q", g.q, "latency weight");
  cmd->add_option("--copies", g.copies, "replicate the generated users m times")
      ->check(CLI::PositiveNumber);
}

void add_solve_flags(CLI::App* cmd, SolveParams& s, bool with_algorithm) {
  cmd->add_option("--instance,-i", s.instance, "instance JSON (else generate)");
  if (with_algorithm) {
    cmd->add_option("--algorithm", s.algorithm, "dual|admm1|admm2|linearized")
        ->check(CLI::IsMember({"dual", "admm1", "admm2", "linearized"}));
  }
  cmd->add_option("--rho", s.rho, "ADMM penalty");
  cmd->add_option("--rho0", s.rho0, "initial dual-decomposition step");
  cmd->add_flag("--constant-step", s.constant_step,
                "dual decomposition: keep the step at rho0");
  cmd->add_option("--linearized-r", s.linearized_r,
                  "linearized ADMM weight (default 1.5 rho N)");
  cmd->add_option("--max-iters", s.max_iters)->check(CLI::NonNegativeNumber);
  cmd->add_option("--tol", s.tol, "stop when D^k/N drops below this");
  cmd->add_flag("--tol-relative", s.tol_relative,
                "scale --tol by the squared mean demand");
  cmd->add_option("--seed", s.seed, "fault seed");
  cmd->add_option("--fail-prob", s.fail_prob)->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--threads", s.threads)->check(CLI::PositiveNumber);
  cmd->add_option("--agg", s.agg, "reduce|allreduce")
      ->check(CLI::IsMember({"reduce", "allreduce"}));
  cmd->add_option("--out,-o", s.out, "trace CSV path");
  cmd->add_flag("--reference", s.reference, "solve a reference first and report V^k");
  cmd->add_flag("--timing", s.timing, "fill wall_ms (traces stop being reproducible)");
}

InstancePtr load_or_generate(const std::string& path, const GenParams& g) {
  mfra_instance* raw = nullptr;
  if (!path.empty()) {
    check(mfra_instance_load(path.c_str(), &raw), "load instance");
  } else {
    check(mfra_instance_generate_glb(g.seed, g.users, g.facilities,
                                     g.capacity_ratio, g.q, g.copies, &raw),
          "generate instance");
  }
  return InstancePtr(raw);
}

mfra_instance_summary summary_of(const mfra_instance* inst) {
  mfra_instance_summary s{};
  check(mfra_instance_get_summary(inst, &s), "instance summary");
  return s;
}

int algorithm_code(const std::string& name) {
  static const std::map<std::string, int> codes = {
      {"dual", MFRA_ALG_DUAL},
      {"admm1", MFRA_ALG_ADMM1},
      {"admm2", MFRA_ALG_ADMM2},
      {"linearized", MFRA_ALG_LINEARIZED}};
  return codes.at(name);
}

mfra_solver_options options_for(const SolveParams& s, const std::string& algorithm,
                                const mfra_instance_summary& inst) {
  mfra_solver_options o;
  mfra_solver_options_default(&o);
  o.algorithm = algorithm_code(algorithm);
  o.rho = o.algorithm == MFRA_ALG_DUAL ? s.rho0 : s.rho;
  o.diminishing_step = s.constant_step ? 0 : 1;
  o.linearized_r = s.linearized_r > 0.0
                       ? s.linearized_r
                       : 1.5 * s.rho * static_cast<double>(inst.num_users);
  o.max_iters = s.max_iters;
  o.stop_threshold =
      s.tol_relative ? s.tol * inst.mean_demand * inst.mean_demand : s.tol;
  o.seed = s.seed;
  o.fail_prob = s.fail_prob;
  o.threads = s.threads;
  o.aggregation = s.agg == "allreduce" ? MFRA_AGG_ALLREDUCE : MFRA_AGG_REDUCE_BROADCAST;
  o.record_timing = s.timing ? 1 : 0;
  return o;
}

RunPtr solve(const mfra_instance* inst, const mfra_solver_options& o,
             const mfra_reference* ref = nullptr) {
  mfra_run* raw = nullptr;
  check(mfra_solve(inst, &o, ref, &raw), "solve");
  return RunPtr(raw);
}

std::vector<mfra_trace_row> trace_of(const mfra_run* run) {
  int64_t len = 0;
  check(mfra_run_trace_length(run, &len), "trace length");
  std::vector<mfra_trace_row> rows(static_cast<size_t>(len));
  for (int64_t k = 0; k < len; ++k) {
    check(mfra_run_trace_row(run, k, &rows[static_cast<size_t>(k)]), "trace row");
  }
  return rows;
}

void kv(const char* key, double v) { std::printf("%s=%.17g\n", key, v); }
void kv(const char* key, int64_t v) {
  std::printf("%s=%lld\n", key, static_cast<long long>(v));
}
void kv(const char* key, const std::string& v) {
  std::printf("%s=%s\n", key, v.c_str());
}

void print_run_summary(const mfra_run* run, const mfra_instance_summary& inst,
                       const std::string& prefix) {
  mfra_run_summary s{};
  check(mfra_run_get_summary(run, &s), "run summary");
  auto key = [&](const char* k) { return prefix + k; };
  kv(key("iterations").c_str(), s.iterations);
  kv(key("termination").c_str(),
     std::string(s.termination == MFRA_TERM_THRESHOLD ? "threshold" : "iteration-limit"));
  kv(key("final_objective").c_str(), s.final_objective);
  kv(key("final_dk").c_str(), s.final_dk);
  kv(key("final_dk_over_n").c_str(),
     s.final_dk / static_cast<double>(inst.num_users));
  if (s.has_primal_residual) {
    kv(key("final_primal_residual").c_str(), s.final_primal_residual);
  }
  kv(key("final_coupling_residual").c_str(), s.final_coupling_residual);
  kv(key("comm_rounds").c_str(), static_cast<int64_t>(s.comm_rounds));
  kv(key("faults").c_str(), s.total_faults);
  if (s.has_initial_vk) kv(key("initial_vk").c_str(), s.initial_vk);
}

ReferencePtr maybe_reference(const mfra_instance* inst, const SolveParams& s) {
  if (!s.reference) return nullptr;
  mfra_reference* raw = nullptr;
  check(mfra_reference_solve(inst, s.rho, 0.0, 0, &raw), "reference");
  ReferencePtr ref(raw);
  mfra_reference_summary rs{};
  check(mfra_reference_get_summary(raw, &rs), "reference summary");
  kv("reference_p_star", rs.p_star);
  kv("reference_iterations", rs.iterations);
  kv("reference_low_confidence", static_cast<int64_t>(rs.low_confidence));
  return ref;
}

void write_csv(const mfra_run* run, const std::string& path) {
  if (path.empty()) return;
  check(mfra_run_write_csv(run, path.c_str()), "write trace");
  kv("trace", path);
}

// "trace.csv" -> "trace.<tag>.csv"
std::string tagged_path(const std::string& path, const std::string& tag) {
  if (path.empty()) return path;
  const auto dot = path.rfind('.');
  const auto slash = path.rfind('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return path + "." + tag;
  }
  return path.substr(0, dot) + "." + tag + path.substr(dot);
}

int cmd_gen(const GenParams& g, const std::string& out) {
  InstancePtr inst = load_or_generate("", g);
  const mfra_instance_summary s = summary_of(inst.get());
  if (!out.empty()) check(mfra_instance_save(inst.get(), out.c_str()), "save instance");
  kv("users", s.num_users);
  kv("facilities", s.num_facilities);
  kv("total_demand", s.total_demand);
  kv("total_capacity", s.total_capacity);
  std::printf("capacity_ratio=%.3f\n", s.total_capacity / s.total_demand);
  if (!out.empty()) kv("instance", out);
  return 0;
}

int cmd_solve(const GenParams& g, const SolveParams& p) {
  InstancePtr inst = load_or_generate(p.instance, g);
  const mfra_instance_summary is = summary_of(inst.get());
  ReferencePtr ref = maybe_reference(inst.get(), p);
  const mfra_solver_options o = options_for(p, p.algorithm, is);
  RunPtr run = solve(inst.get(), o, ref.get());
  kv("algorithm", p.algorithm);
  kv("users", is.num_users);
  kv("facilities", is.num_facilities);
  kv("stop_threshold", o.stop_threshold);
  print_run_summary(run.get(), is, "");
  write_csv(run.get(), p.out);
  return 0;
}

int cmd_compare(const GenParams& g, const SolveParams& p, int64_t every) {
  InstancePtr inst = load_or_generate(p.instance, g);
  const mfra_instance_summary is = summary_of(inst.get());
  RunPtr admm = solve(inst.get(), options_for(p, "admm1", is));
  RunPtr dual = solve(inst.get(), options_for(p, "dual", is));
  const auto ra = trace_of(admm.get());
  const auto rd = trace_of(dual.get());
  const size_t len = std::max(ra.size(), rd.size());
  for (size_t k = 0; k < len; ++k) {
    const bool last = k + 1 == len;
    if (!last && (every <= 0 || (k + 1) % static_cast<size_t>(every) != 0)) continue;
    std::printf("iter=%zu", k + 1);
    if (k < ra.size()) {
      std::printf(" admm1_objective=%.17g admm1_primal_residual=%.17g",
                  ra[k].objective, ra[k].primal_residual);
    }
    if (k < rd.size()) {
      std::printf(" dual_objective=%.17g dual_coupling_residual=%.17g",
                  rd[k].objective, rd[k].coupling_residual);
    }
    std::printf("\n");
  }
  print_run_summary(admm.get(), is, "admm1_");
  print_run_summary(dual.get(), is, "dual_");
  if (!ra.empty() && !rd.empty() && ra.back().primal_residual > 0.0) {
    kv("residual_ratio", rd.back().coupling_residual / ra.back().primal_residual);
  }
  write_csv(admm.get(), tagged_path(p.out, "admm1"));
  write_csv(dual.get(), tagged_path(p.out, "dual"));
  return 0;
}

int cmd_fault_sim(const GenParams& g, const SolveParams& p, int64_t probe_iter) {
  InstancePtr inst = load_or_generate(p.instance, g);
  const mfra_instance_summary is = summary_of(inst.get());
  SolveParams clean = p;
  clean.fail_prob = 0.0;
  RunPtr base = solve(inst.get(), options_for(clean, p.algorithm, is));
  RunPtr faulted = solve(inst.get(), options_for(p, p.algorithm, is));
  const auto rb = trace_of(base.get());
  const auto rf = trace_of(faulted.get());
  const size_t len = std::min(rb.size(), rf.size());

  double max_err = 0.0;
  double probe_err = std::nan("");
  std::string csv = "iter,objective,objective_faulty,relative_error,Dk,Dk_faulty\n";
  char line[512];
  for (size_t k = 0; k < len; ++k) {
    const double err = rf[k].objective / rb[k].objective - 1.0;
    max_err = std::max(max_err, std::fabs(err));
    if (static_cast<int64_t>(k + 1) == probe_iter) probe_err = err;
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", k + 1,
                  rb[k].objective, rf[k].objective, err, rb[k].dk, rf[k].dk);
    csv += line;
  }
  kv("algorithm", p.algorithm);
  kv("fail_prob", p.fail_prob);
  kv("compared_iterations", static_cast<int64_t>(len));
  kv("max_relative_error", max_err);
  if (!std::isnan(probe_err)) {
    std::printf("relative_error_at_%lld=%.17g\n", static_cast<long long>(probe_iter),
                probe_err);
  }
  if (len > 0) kv("final_relative_error", rf[len - 1].objective / rb[len - 1].objective - 1.0);
  print_run_summary(base.get(), is, "fault_free_");
  print_run_summary(faulted.get(), is, "faulty_");
  if (!p.out.empty()) {
    std::ofstream f(p.out, std::ios::binary | std::ios::trunc);
    f << csv;
    if (!f) throw Failure{MFRA_ERR_IO, "cannot write " + p.out};
    kv("report", p.out);
  }
  return 0;
}

int cmd_rho_sweep(const GenParams& g, const SolveParams& p) {
  InstancePtr inst = load_or_generate(p.instance, g);
  const mfra_instance_summary is = summary_of(inst.get());
  double best_rho = 0.0;
  int64_t best_iters = -1;
  for (int e = -4; e <= 4; ++e) {
    SolveParams q = p;
    q.rho = std::pow(10.0, e);
    RunPtr run = solve(inst.get(), options_for(q, p.algorithm, is));
    mfra_run_summary s{};
    check(mfra_run_get_summary(run.get(), &s), "run summary");
    const bool hit = s.termination == MFRA_TERM_THRESHOLD;
    std::printf("rho=%g iterations=%lld termination=%s final_objective=%.17g\n",
                q.rho, static_cast<long long>(s.iterations),
                hit ? "threshold" : "iteration-limit", s.final_objective);
    if (hit && (best_iters < 0 || s.iterations < best_iters)) {
      best_iters = s.iterations;
      best_rho = q.rho;
    }
  }
  if (best_iters >= 0) {
    std::printf("fastest_rho=%g\n", best_rho);
    kv("fastest_iterations", best_iters);
  } else {
    kv("fastest_rho", std::string("none"));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mfra: distributed resource allocation solvers"};
  app.require_subcommand(1);

  GenParams gen;
  SolveParams sp;
  std::string gen_out;
  int64_t compare_every = 50;
  int64_t probe_iter = 50;

  CLI::App* g = app.add_subcommand("gen", "generate a GLB instance");
  add_gen_flags(g, gen);
  g->add_option("--out,-o", gen_out, "instance JSON path");

  CLI::App* s = app.add_subcommand("solve", "run one algorithm");
  add_gen_flags(s, gen);
  add_solve_flags(s, sp, true);

  CLI::App* c = app.add_subcommand("compare", "ADMM against dual decomposition");
  add_gen_flags(c, gen);
  add_solve_flags(c, sp, false);
  c->add_option("--every", compare_every, "report interval");

  CLI::App* f = app.add_subcommand("fault-sim", "fault-free against faulty run");
  add_gen_flags(f, gen);
  add_solve_flags(f, sp, true);
  f->add_option("--probe-iter", probe_iter, "iteration whose error is reported");

  CLI::App* r = app.add_subcommand("rho-sweep", "try rho in 1e-4 .. 1e4");
  add_gen_flags(r, gen);
  add_solve_flags(r, sp, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (g->parsed()) return cmd_gen(gen, gen_out);
    if (s->parsed()) return cmd_solve(gen, sp);
    if (c->parsed()) return cmd_compare(gen, sp, compare_every);
    if (f->parsed()) return cmd_fault_sim(gen, sp, probe_iter);
    if (r->parsed()) return cmd_rho_sweep(gen, sp);
  } catch (const Failure& e) {
    std::fprintf(stderr, "error: %s\n", e.message.c_str());
    kv("error", std::string(mfra_status_name(e.status)));
    return 2 + e.status;
  }
  return 1;
}
