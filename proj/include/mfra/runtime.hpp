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

#ifndef MFRA_RUNTIME_HPP_
#define MFRA_RUNTIME_HPP_

// In-process stand-in for the parallel deployment: users are sharded over
// worker threads, facility sums are reduced in a fixed order, and faults are
// drawn from a counter-based generator keyed by (iteration, user) so the
// trajectory does not depend on scheduling.

#include <cstdint>
#include <vector>

#include "mfra/core_model.hpp"

namespace mfra {

struct FaultPolicy {
  double fail_prob = 0.0;
  std::uint64_t seed = 0;

  // Uniform draw on [0, 1) for the given (iteration, user) pair. A user is
  // faulted when draw < fail_prob, so raising fail_prob only adds faults.
  double draw(std::uint64_t iteration, Index user) const;
  bool faulted(std::uint64_t iteration, Index user) const {
    return fail_prob > 0.0 && draw(iteration, user) < fail_prob;
  }
};

enum class AggregationMode { kReduceBroadcast, kAllreduce };

struct AggregationPlan {
  AggregationMode mode = AggregationMode::kReduceBroadcast;
  Index shard_count = 1;

  int rounds_per_iteration() const {
    return mode == AggregationMode::kReduceBroadcast ? 2 : 1;
  }
};

// Anchor of user i is anchor_weight * x_i - shift; the prox weight is rho.
struct XUpdateRequest {
  Vector shift;
  double anchor_weight = 1.0;
  double rho = 1.0;
};

struct XUpdateOutcome {
  AllocationMatrix x;
  std::vector<std::uint8_t> fault_mask;
  Index fault_count = 0;
};

// Faulted users keep their previous row. Results are bitwise identical for
// every worker_count.
XUpdateOutcome execute_x_updates(const ProblemInstance& inst,
                                 const AllocationMatrix& x_prev,
                                 const XUpdateRequest& request,
                                 std::uint64_t iteration,
                                 const FaultPolicy& faults, Index worker_count);

// Column sums accumulated in ascending user order regardless of mode.
Vector aggregate(const AllocationMatrix& x, const AggregationPlan& plan);

struct BroadcastRecord {
  std::vector<Vector> received;  // one copy per shard
  int rounds = 0;                // communication rounds this iteration
};

BroadcastRecord broadcast(const Vector& d, const AggregationPlan& plan);

}  // namespace mfra

#endif  // MFRA_RUNTIME_HPP_
