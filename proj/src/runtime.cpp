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

#include "mfra/runtime.hpp"

#include <algorithm>
#include <exception>
#include <thread>

#include "mfra/errors.hpp"
#include "mfra/subproblems.hpp"

namespace mfra {
namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

double FaultPolicy::draw(std::uint64_t iteration, Index user) const {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ iteration);
  h = splitmix64(h ^ static_cast<std::uint64_t>(user));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

XUpdateOutcome execute_x_updates(const ProblemInstance& inst,
                                 const AllocationMatrix& x_prev,
                                 const XUpdateRequest& request,
                                 std::uint64_t iteration,
                                 const FaultPolicy& faults, Index worker_count) {
  if (worker_count < 1) throw ParameterError("worker_count must be >= 1");
  const Index N = inst.num_users();
  const Index n = inst.num_facilities();
  if (x_prev.rows() != N || x_prev.cols() != n || request.shift.size() != n) {
    throw ShapeError("x-update inputs disagree with the instance");
  }

  XUpdateOutcome out;
  out.x.resize(N, n);
  out.fault_mask.assign(static_cast<size_t>(N), 0);

  auto solve_range = [&](Index begin, Index end) {
    Vector anchor(n);
    for (Index i = begin; i < end; ++i) {
      if (faults.faulted(iteration, i)) {
        out.fault_mask[static_cast<size_t>(i)] = 1;
        out.x.row(i) = x_prev.row(i);
        continue;
      }
      anchor = request.anchor_weight * x_prev.row(i).transpose() - request.shift;
      const UserSpec& u = inst.user(i);
      out.x.row(i) =
          prox_user(u.utility, u.feasible, anchor, request.rho).minimizer.transpose();
    }
  };

  const Index workers = std::min(worker_count, N);
  if (workers == 1) {
    solve_range(0, N);
  } else {
    std::vector<std::exception_ptr> errors(static_cast<size_t>(workers));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (Index w = 0; w < workers; ++w) {
      const Index begin = N * w / workers;
      const Index end = N * (w + 1) / workers;
      pool.emplace_back([&, w, begin, end] {
        try {
          solve_range(begin, end);
        } catch (...) {
          errors[static_cast<size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  for (std::uint8_t f : out.fault_mask) out.fault_count += f;
  return out;
}

Vector aggregate(const AllocationMatrix& x, const AggregationPlan& /*plan*/) {
  return column_sums(x);
}

BroadcastRecord broadcast(const Vector& d, const AggregationPlan& plan) {
  BroadcastRecord record;
  record.received.assign(static_cast<size_t>(std::max<Index>(plan.shard_count, 1)), d);
  record.rounds = plan.rounds_per_iteration();
  return record;
}

}  // namespace mfra
