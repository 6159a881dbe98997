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

#include "mfra/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include "mfra/errors.hpp"

namespace mfra {
namespace {

// Uniform double on [0, 1) from the top 53 bits; independent of the standard
// library's distribution implementations.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

const std::array<double, 10>& market_price_table() {
  static const std::array<double, 10> kPrices = {
      0.0412, 0.0465, 0.0389, 0.0531, 0.0447,
      0.0598, 0.0356, 0.0502, 0.0623, 0.0436};
  return kPrices;
}

ProblemInstance build_glb(const GlbSpec& spec) {
  const auto n = static_cast<Index>(spec.facilities.size());
  if (spec.users.empty() || n == 0) {
    throw BuildError("GLB spec needs at least one user and one facility");
  }
  if (!(spec.q >= 0.0) || !std::isfinite(spec.q)) {
    throw BuildError("GLB weight q must be finite and >= 0");
  }

  double total_demand = 0.0;
  std::vector<UserSpec> users;
  users.reserve(spec.users.size() + spec.batch.size());
  for (size_t i = 0; i < spec.users.size(); ++i) {
    const GlbUser& u = spec.users[i];
    if (!(u.demand > 0.0) || !std::isfinite(u.demand)) {
      throw BuildError("user " + std::to_string(i) + ": demand must be > 0");
    }
    if (u.latency.size() != n) {
      throw BuildError("user " + std::to_string(i) + ": latency vector has " +
                       std::to_string(u.latency.size()) + " entries, expected " +
                       std::to_string(n));
    }
    if (!u.latency.allFinite() || u.latency.minCoeff() < 0.0) {
      throw BuildError("user " + std::to_string(i) + ": latencies must be >= 0");
    }
    total_demand += u.demand;
    users.push_back({ConcaveUtility::quadratic_latency(spec.q, u.demand, u.latency),
                     FeasibleSet::scaled_simplex(u.demand)});
  }

  double total_capacity = 0.0;
  std::vector<FacilitySpec> facilities;
  facilities.reserve(spec.facilities.size());
  for (size_t j = 0; j < spec.facilities.size(); ++j) {
    const GlbFacility& f = spec.facilities[j];
    if (!(f.servers > 0.0) || !std::isfinite(f.servers)) {
      throw BuildError("facility " + std::to_string(j) + ": servers must be > 0");
    }
    if (f.idle_power > f.peak_power) {
      throw BuildError("facility " + std::to_string(j) +
                       ": idle power exceeds peak power");
    }
    EnergyCost e;
    e.energy_price = f.energy_price;
    e.carbon_price = f.carbon_price;
    e.pue = f.pue;
    e.idle_power = f.idle_power;
    e.peak_power = f.peak_power;
    e.servers = f.servers;
    total_capacity += f.servers;
    facilities.push_back({ConvexCost::energy(e), 0.0, f.servers});
  }

  if (total_capacity < total_demand) {
    std::ostringstream msg;
    msg << "capacity shortfall: total capacity " << total_capacity
        << " is below total demand " << total_demand << " by "
        << (total_demand - total_capacity);
    throw BuildError(msg.str());
  }

  for (size_t b = 0; b < spec.batch.size(); ++b) {
    const GlbBatch& batch = spec.batch[b];
    if (batch.home < 0 || batch.home >= n) {
      throw BuildError("batch entry " + std::to_string(b) +
                       ": home facility out of range");
    }
    DenseMatrix selector = DenseMatrix::Zero(1, n);
    selector(0, batch.home) = 1.0;
    Vector upper = Vector::Zero(n);
    upper[batch.home] = spec.facilities[static_cast<size_t>(batch.home)].servers;
    users.push_back({ConcaveUtility::log_rate(batch.scale, std::move(selector)),
                     FeasibleSet::box(Vector::Zero(n), std::move(upper))});
  }

  return ProblemInstance(std::move(users), std::move(facilities));
}

GlbSpec generate_random_glb(std::uint64_t seed, Index num_users,
                            Index num_facilities, double capacity_ratio,
                            double q) {
  if (num_users < 1 || num_facilities < 1) {
    throw ParameterError("generator needs N >= 1 and n >= 1");
  }
  if (!(capacity_ratio >= 1.0)) {
    throw ParameterError("capacity ratio must be >= 1");
  }
  constexpr double kMeanDemand = 9e4;
  std::mt19937_64 rng(seed);

  GlbSpec spec;
  spec.q = q;
  spec.users.resize(static_cast<size_t>(num_users));
  double total_demand = 0.0;
  for (auto& u : spec.users) {
    u.demand = kMeanDemand * (0.5 + unit_uniform(rng));
    total_demand += u.demand;
  }
  for (auto& u : spec.users) {
    u.latency.resize(num_facilities);
    for (Index j = 0; j < num_facilities; ++j) {
      u.latency[j] = 0.05 + 0.05 * unit_uniform(rng);
    }
  }

  std::vector<double> weights(static_cast<size_t>(num_facilities));
  double weight_sum = 0.0;
  for (double& w : weights) {
    w = 0.5 + unit_uniform(rng);
    weight_sum += w;
  }
  const double total_capacity = capacity_ratio * total_demand;
  const auto& prices = market_price_table();
  spec.facilities.resize(static_cast<size_t>(num_facilities));
  for (size_t j = 0; j < spec.facilities.size(); ++j) {
    GlbFacility& f = spec.facilities[j];
    f.servers = total_capacity * weights[j] / weight_sum;
    f.energy_price = prices[j % prices.size()];
    f.pue = 1.5;
    f.peak_power = 200.0;
    f.idle_power = 100.0;
  }
  return spec;
}

GlbSpec replicate_glb(const GlbSpec& spec, int copies) {
  if (copies < 1) throw ParameterError("replication count must be >= 1");
  GlbSpec out = spec;
  out.users.clear();
  out.users.reserve(spec.users.size() * static_cast<size_t>(copies));
  for (int c = 0; c < copies; ++c) {
    out.users.insert(out.users.end(), spec.users.begin(), spec.users.end());
  }
  for (auto& f : out.facilities) f.servers *= copies;
  out.batch.clear();
  for (int c = 0; c < copies; ++c) {
    out.batch.insert(out.batch.end(), spec.batch.begin(), spec.batch.end());
  }
  return out;
}

// ---------------------------------------------------------------------------

DenseMatrix topology_left_inverse(const DenseMatrix& entries) {
  if (entries.cols() == 0 || entries.rows() < entries.cols()) {
    throw BuildError("topology matrix cannot have full column rank");
  }
  Eigen::FullPivLU<DenseMatrix> rank_check(entries);
  if (rank_check.rank() < entries.cols()) {
    throw BuildError("topology matrix is rank deficient");
  }
  const DenseMatrix gram = entries.transpose() * entries;
  const Eigen::PartialPivLU<DenseMatrix> lu(gram);
  DenseMatrix inv = lu.solve(entries.transpose());
  // One refinement step against the Gram system keeps the identity residual
  // at rounding level.
  inv += lu.solve(entries.transpose() - gram * inv);
  return inv;
}

TopologyMatrix make_topology(Index num_links,
                             const std::vector<std::vector<Index>>& paths) {
  if (paths.empty()) throw BuildError("flow has no paths");
  TopologyMatrix topo;
  topo.entries = DenseMatrix::Zero(num_links, static_cast<Index>(paths.size()));
  for (size_t p = 0; p < paths.size(); ++p) {
    if (paths[p].empty()) {
      throw BuildError("path " + std::to_string(p) + " is empty");
    }
    for (Index link : paths[p]) {
      if (link < 0 || link >= num_links) {
        throw BuildError("path " + std::to_string(p) + " uses unknown link " +
                         std::to_string(link));
      }
      topo.entries(link, static_cast<Index>(p)) = 1.0;
    }
    Eigen::FullPivLU<DenseMatrix> lu(topo.entries.leftCols(static_cast<Index>(p) + 1));
    if (lu.rank() < static_cast<Index>(p) + 1) {
      throw BuildError("path " + std::to_string(p) +
                       " is redundant: its link set is a combination of earlier paths");
    }
  }
  topo.left_inverse = topology_left_inverse(topo.entries);
  return topo;
}

PiecewiseLinearCost default_congestion(double capacity, double base_slope) {
  PiecewiseLinearCost c;
  c.breakpoints = {0.6 * capacity, 0.8 * capacity, 0.95 * capacity};
  c.slopes = {base_slope, 2.0 * base_slope, 4.0 * base_slope, 8.0 * base_slope};
  return c;
}

ProblemInstance build_te(const TeSpec& spec) {
  const auto num_links = static_cast<Index>(spec.link_capacity.size());
  if (num_links == 0 || spec.flows.empty()) {
    throw BuildError("TE spec needs at least one link and one flow");
  }
  for (size_t j = 0; j < spec.link_capacity.size(); ++j) {
    if (!(spec.link_capacity[j] > 0.0) || !std::isfinite(spec.link_capacity[j])) {
      throw BuildError("link " + std::to_string(j) + ": capacity must be > 0");
    }
  }
  if (!spec.congestion.empty() &&
      spec.congestion.size() != spec.link_capacity.size()) {
    throw BuildError("congestion costs must be given for every link or none");
  }
  if (!spec.bandwidth_price.empty() &&
      spec.bandwidth_price.size() != spec.link_capacity.size()) {
    throw BuildError("bandwidth prices must be given for every link or none");
  }

  std::vector<UserSpec> users;
  for (size_t i = 0; i < spec.flows.size(); ++i) {
    const TeFlow& flow = spec.flows[i];
    std::vector<std::vector<Index>> paths;
    for (const auto& path : flow.paths) {
      if (!spec.path_filter || spec.path_filter(static_cast<Index>(i), path)) {
        paths.push_back(path);
      }
    }
    if (paths.empty()) {
      throw BuildError("flow " + std::to_string(i) + " has no admissible paths");
    }
    TopologyMatrix topo;
    try {
      topo = make_topology(num_links, paths);
    } catch (const BuildError& e) {
      throw BuildError("flow " + std::to_string(i) + ": " + e.what());
    }
    Vector cap(static_cast<Index>(paths.size()));
    for (size_t p = 0; p < paths.size(); ++p) {
      double c = std::numeric_limits<double>::infinity();
      for (Index link : paths[p]) {
        c = std::min(c, spec.link_capacity[static_cast<size_t>(link)]);
      }
      cap[static_cast<Index>(p)] = c;
    }

    ConcaveUtility utility;
    if (flow.custom_value) {
      if (!flow.custom_gradient) {
        throw BuildError("flow " + std::to_string(i) +
                         ": custom utility needs a gradient");
      }
      const DenseMatrix sel = topo.left_inverse;
      auto value = flow.custom_value;
      auto gradient = flow.custom_gradient;
      utility = ConcaveUtility::custom(
          [sel, value](const Vector& x) { return value(sel * x); },
          [sel, gradient](const Vector& x) -> Vector {
            return sel.transpose() * gradient(sel * x);
          });
    } else {
      utility = ConcaveUtility::log_rate(flow.scale, topo.left_inverse);
    }
    users.push_back({std::move(utility),
                     FeasibleSet::path_image(topo.entries, std::move(cap))});
  }

  std::vector<FacilitySpec> facilities;
  for (size_t j = 0; j < spec.link_capacity.size(); ++j) {
    const double c = spec.link_capacity[j];
    PiecewiseLinearCost cost = spec.congestion.empty()
                                   ? default_congestion(c, spec.congestion_base_slope)
                                   : spec.congestion[j];
    if (!spec.bandwidth_price.empty()) {
      for (double& s : cost.slopes) s += spec.bandwidth_price[j];
    }
    facilities.push_back({ConvexCost::piecewise_linear(cost.breakpoints, cost.slopes,
                                                       cost.value_at_zero),
                          0.0, c});
  }
  return ProblemInstance(std::move(users), std::move(facilities));
}

}  // namespace mfra
