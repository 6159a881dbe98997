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

#ifndef MFRA_PROBLEMS_HPP_
#define MFRA_PROBLEMS_HPP_

// Scenario builders: geographical load balancing (GLB) and backbone traffic
// engineering (TE), plus the random GLB generator used by the experiments.

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "mfra/core_model.hpp"

namespace mfra {

// ---------------------------------------------------------------------------
// Geographical load balancing

struct GlbUser {
  double demand = 0.0;  // t_i, server-equivalents
  Vector latency;       // l_ij, seconds
};

struct GlbFacility {
  double servers = 0.0;       // c_j, also the capacity
  double energy_price = 0.0;  // P^E_j, $/kWh
  double carbon_price = 0.0;  // P^C_j, $/kWh
  double pue = 1.5;
  double idle_power = 100.0;  // W
  double peak_power = 200.0;  // W
};

// A delay-tolerant batch workload pinned to one facility, valued at
// scale * log(1 + w).
struct GlbBatch {
  Index home = 0;
  double scale = 1.0;
};

inline constexpr double kDefaultLatencyWeight = 40.0;

struct GlbSpec {
  std::vector<GlbUser> users;
  std::vector<GlbFacility> facilities;
  double q = kDefaultLatencyWeight;
  std::vector<GlbBatch> batch;
};

// Interactive users become quadratic-latency utilities over scaled simplices;
// facilities get energy costs on [0, c_j]; batch entries are appended as extra
// users after the interactive ones. Throws BuildError on invalid specs or
// when total capacity is below total demand.
ProblemInstance build_glb(const GlbSpec& spec);

// Demands uniform on [0.5, 1.5] x 9e4, latencies uniform on [0.05, 0.10] s,
// capacities with sum equal to capacity_ratio x total demand, P_peak = 200 W,
// P_idle = 100 W, PUE = 1.5 and energy prices from market_price_table().
GlbSpec generate_random_glb(std::uint64_t seed, Index num_users,
                            Index num_facilities, double capacity_ratio = 1.4,
                            double q = kDefaultLatencyWeight);

// Ten on-peak day-ahead energy prices in $/kWh, one per market.
const std::array<double, 10>& market_price_table();

// Repeats the user list m times and scales every facility's servers by m.
GlbSpec replicate_glb(const GlbSpec& spec, int copies);

// ---------------------------------------------------------------------------
// Backbone traffic engineering

// Link-by-path 0/1 incidence matrix of one flow and a left-inverse of it.
struct TopologyMatrix {
  DenseMatrix entries;       // |J| x |P|
  DenseMatrix left_inverse;  // |P| x |J|
};

// Moore-Penrose left-inverse (A^T A)^{-1} A^T. Throws BuildError when A does
// not have full column rank.
DenseMatrix topology_left_inverse(const DenseMatrix& entries);

// Builds A from link-index lists. Throws BuildError naming the first path
// that is linearly dependent on the earlier ones.
TopologyMatrix make_topology(Index num_links,
                             const std::vector<std::vector<Index>>& paths);

struct TeFlow {
  std::vector<std::vector<Index>> paths;
  double scale = 1.0;  // log-rate utility scale * sum_p log(1 + w_p)
  // Optional concave utility on path rates w; replaces the log-rate utility.
  std::function<double(const Vector&)> custom_value;
  std::function<Vector(const Vector&)> custom_gradient;
};

struct TeSpec {
  std::vector<double> link_capacity;  // c_j
  std::vector<TeFlow> flows;
  // Per-link congestion cost; empty means default_congestion() on every link.
  std::vector<PiecewiseLinearCost> congestion;
  // Optional per-link linear bandwidth price, added to the congestion slopes.
  std::vector<double> bandwidth_price;
  double congestion_base_slope = 0.01;
  // Paths rejected by the filter are dropped before building.
  std::function<bool(Index flow, const std::vector<Index>& path)> path_filter;
};

// Four pieces with slopes base, 2 base, 4 base, 8 base switching at 60%, 80%
// and 95% of capacity.
PiecewiseLinearCost default_congestion(double capacity, double base_slope);

// Each flow becomes a user over link-space allocations x = A w with
// 0 <= w_p <= min capacity along p; facilities are links on [0, c_j].
ProblemInstance build_te(const TeSpec& spec);

}  // namespace mfra

#endif  // MFRA_PROBLEMS_HPP_
