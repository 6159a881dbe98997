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

#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "mfra/errors.hpp"
#include "mfra/problems.hpp"
#include "mfra/serialization.hpp"
#include "support.hpp"

using namespace mfra;

TEST_CASE("instance round trip is exact") {
  mfra::testing::Rng rng(8);
  for (int t = 0; t < 10; ++t) {
    const ProblemInstance a = mfra::testing::random_tiny_instance(rng, 3, 2);
    const std::string text = instance_to_json(a);
    const ProblemInstance b = instance_from_json(text);
    CHECK(instance_to_json(b) == text);
    AllocationMatrix x(3, 2);
    for (Index i = 0; i < 3; ++i) x.row(i) = mfra::testing::random_vector(rng, 2, 0.0, 1.0).transpose();
    CHECK(evaluate_objective(a, x) == evaluate_objective(b, x));
  }
}

TEST_CASE("GLB and TE instances round trip") {
  const ProblemInstance g = build_glb(generate_random_glb(7, 20, 4));
  CHECK(instance_to_json(instance_from_json(instance_to_json(g))) == instance_to_json(g));

  TeSpec te;
  te.link_capacity = {1.0, 2.0, 3.0};
  te.flows.push_back({{{0, 1}, {2}}, 1.0, {}, {}});
  te.bandwidth_price = {0.1, 0.2, 0.3};
  const ProblemInstance t = build_te(te);
  CHECK(instance_to_json(instance_from_json(instance_to_json(t))) == instance_to_json(t));
}

TEST_CASE("spec round trips") {
  GlbSpec g = generate_random_glb(3, 5, 2);
  g.batch.push_back({1, 3.0});
  const std::string gt = glb_spec_to_json(g);
  CHECK(glb_spec_to_json(glb_spec_from_json(gt)) == gt);

  TeSpec te;
  te.link_capacity = {4.0, 5.0};
  te.flows.push_back({{{0}, {1}}, 2.0, {}, {}});
  te.congestion = {default_congestion(4.0, 0.01), default_congestion(5.0, 0.01)};
  const std::string tt = te_spec_to_json(te);
  CHECK(te_spec_to_json(te_spec_from_json(tt)) == tt);
}

TEST_CASE("callback kinds cannot be serialized") {
  const ProblemInstance inst(
      {{ConcaveUtility::custom([](const Vector&) { return 0.0; },
                               [](const Vector& x) -> Vector { return Vector::Zero(x.size()); }),
        FeasibleSet::scaled_simplex(1.0)}},
      {{ConvexCost::linear(1.0), 0.0, 2.0}});
  CHECK_THROWS_AS(instance_to_json(inst), UnsupportedError);
}

TEST_CASE("malformed documents") {
  CHECK_THROWS_AS(instance_from_json("{not json"), ParseError);
  CHECK_THROWS_AS(instance_from_json(R"({"n": 1, "users": [], "facilities": 3})"), ParseError);
  CHECK_THROWS_AS(read_text_file("/nonexistent/dir/file.json"), IoError);
}

TEST_CASE("files") {
  const auto path = std::filesystem::temp_directory_path() / "mfra_serialization_test.json";
  const std::string text = instance_to_json(build_glb(generate_random_glb(1, 3, 2)), 2);
  write_text_file(path.string(), text);
  CHECK(read_text_file(path.string()) == text);
  std::filesystem::remove(path);
}
