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

#include <cmath>
#include <random>

#include <Eigen/LU>

#include "doctest.h"
#include "mfra/errors.hpp"
#include "mfra/problems.hpp"

using namespace mfra;

TEST_CASE("generator is deterministic per seed") {
  const GlbSpec a = generate_random_glb(7, 50, 10);
  const GlbSpec b = generate_random_glb(7, 50, 10);
  const GlbSpec c = generate_random_glb(8, 50, 10);
  REQUIRE(a.users.size() == 50);
  REQUIRE(a.facilities.size() == 10);
  bool differs = false;
  for (size_t i = 0; i < a.users.size(); ++i) {
    CHECK(a.users[i].demand == b.users[i].demand);
    CHECK(a.users[i].latency == b.users[i].latency);
    differs = differs || a.users[i].demand != c.users[i].demand;
  }
  for (size_t j = 0; j < a.facilities.size(); ++j) {
    CHECK(a.facilities[j].servers == b.facilities[j].servers);
    CHECK(a.facilities[j].energy_price == b.facilities[j].energy_price);
  }
  CHECK(differs);
}

TEST_CASE("generator ranges and capacity ratio") {
  const GlbSpec s = generate_random_glb(3, 10000, 10);
  double demand = 0.0, capacity = 0.0;
  for (const GlbUser& u : s.users) {
    demand += u.demand;
    CHECK(u.latency.minCoeff() >= 0.05);
    CHECK(u.latency.maxCoeff() <= 0.10);
  }
  for (const GlbFacility& f : s.facilities) capacity += f.servers;
  CHECK(std::abs(capacity / demand - 1.4) <= 1e-9);
  CHECK(s.q == kDefaultLatencyWeight);
}

TEST_CASE("forced single allocation") {
  GlbSpec s;
  GlbUser u;
  u.demand = 2.0;
  u.latency = Vector::Constant(1, 0.1);
  s.users = {u};
  GlbFacility f;
  f.servers = 2.0;
  f.energy_price = 1.0;
  f.pue = 1.5;
  f.idle_power = 0.5;
  f.peak_power = 1.0;
  s.facilities = {f};
  s.q = 1.0;
  const ProblemInstance inst = build_glb(s);
  AllocationMatrix x(1, 1);
  x << 2.0;
  // -q t (x l / t)^2 - (P^E) PUE (c P_idle + (P_peak - P_idle) y)
  const double want = -1.0 * 2.0 * std::pow(2.0 * 0.1 / 2.0, 2) - 1.0 * 1.5 * (2.0 * 0.5 + 0.5 * 2.0);
  CHECK(evaluate_objective(inst, x) == doctest::Approx(want).epsilon(1e-14));
  CHECK(inst.user(0).feasible.violation(x.row(0).transpose()) == 0.0);
}

TEST_CASE("capacity shortfall is a build error") {
  GlbSpec s = generate_random_glb(1, 5, 2);
  for (GlbFacility& f : s.facilities) f.servers *= 0.5;
  CHECK_THROWS_AS(build_glb(s), BuildError);
}

TEST_CASE("batch users become virtual users") {
  GlbSpec s = generate_random_glb(1, 4, 3);
  s.batch.push_back({1, 2.0});
  const ProblemInstance inst = build_glb(s);
  CHECK(inst.num_users() == 5);
}

TEST_CASE("replication") {
  const GlbSpec s = generate_random_glb(1, 4, 3);
  const GlbSpec r = replicate_glb(s, 3);
  REQUIRE(r.users.size() == 12);
  CHECK(r.users[9].demand == s.users[1].demand);
  CHECK(r.facilities[2].servers == 3.0 * s.facilities[2].servers);
  CHECK_THROWS_AS(replicate_glb(s, 0), ParameterError);
}

TEST_CASE("two-path flow topology") {
  const TopologyMatrix t = make_topology(3, {{0, 1}, {2}});
  DenseMatrix want(3, 2);
  want << 1, 0, 1, 0, 0, 1;
  CHECK(t.entries == want);
  DenseMatrix pinv(2, 3);
  pinv << 0.5, 0.5, 0, 0, 0, 1;
  CHECK((t.left_inverse - pinv).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK((t.left_inverse * t.entries - DenseMatrix::Identity(2, 2)).lpNorm<Eigen::Infinity>() <
        1e-12);
}

TEST_CASE("left inverse of identity and of random full-rank 0/1 matrices") {
  CHECK((topology_left_inverse(DenseMatrix::Identity(4, 4)) - DenseMatrix::Identity(4, 4))
            .lpNorm<Eigen::Infinity>() < 1e-15);
  std::mt19937_64 rng(11);
  int tested = 0;
  while (tested < 50) {
    DenseMatrix a(6, 3);
    for (Index r = 0; r < 6; ++r)
      for (Index c = 0; c < 3; ++c) a(r, c) = static_cast<double>(rng() & 1U);
    if (Eigen::FullPivLU<DenseMatrix>(a).rank() < 3) {
      CHECK_THROWS_AS(topology_left_inverse(a), BuildError);
      continue;
    }
    const DenseMatrix inv = topology_left_inverse(a);
    CHECK((inv * a - DenseMatrix::Identity(3, 3)).lpNorm<Eigen::Infinity>() <= 1e-10);
    ++tested;
  }
}

TEST_CASE("redundant path is rejected") {
  CHECK_THROWS_AS(make_topology(3, {{0}, {1}, {0, 1}}), BuildError);
}

TEST_CASE("TE build") {
  TeSpec s;
  s.link_capacity = {1.0, 2.0, 3.0};
  s.flows.push_back({{{0, 1}, {2}}, 1.0, {}, {}});
  s.flows.push_back({{{1}}, 2.0, {}, {}});
  const ProblemInstance inst = build_te(s);
  CHECK(inst.num_users() == 2);
  CHECK(inst.num_facilities() == 3);
  // single-path flow: utility only sees its own link
  Vector x = Vector::Zero(3);
  x[1] = 1.0;
  CHECK(inst.user(1).utility.value(x) == doctest::Approx(2.0 * std::log(2.0)));
  x[0] = 5.0;
  CHECK(inst.user(1).utility.value(x) == doctest::Approx(2.0 * std::log(2.0)));

  s.path_filter = [](Index flow, const std::vector<Index>&) { return flow != 1; };
  CHECK_THROWS_AS(build_te(s), BuildError);
}
