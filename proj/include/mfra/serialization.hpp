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

#ifndef MFRA_SERIALIZATION_HPP_
#define MFRA_SERIALIZATION_HPP_

// JSON documents for instances and scenario specs.
//
// Instance:
//   {"n": 2,
//    "users": [{"utility": {"kind": "quadratic-latency", ...},
//               "feasible": {"kind": "scaled-simplex", "total": 1.0}}],
//    "facilities": [{"cost": {"kind": "linear", ...}, "interval": [0, 5]}]}
//
// Callback-backed kinds (custom utilities, sets, costs) have no JSON form and
// raise UnsupportedError.

#include <string>

#include "mfra/core_model.hpp"
#include "mfra/problems.hpp"

namespace mfra {

std::string instance_to_json(const ProblemInstance& inst, int indent = -1);
ProblemInstance instance_from_json(const std::string& text);

std::string glb_spec_to_json(const GlbSpec& spec, int indent = -1);
GlbSpec glb_spec_from_json(const std::string& text);

// Custom flow utilities and the path filter are not serialized.
std::string te_spec_to_json(const TeSpec& spec, int indent = -1);
TeSpec te_spec_from_json(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace mfra

#endif  // MFRA_SERIALIZATION_HPP_
