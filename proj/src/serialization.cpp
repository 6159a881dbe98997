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

#include "mfra/serialization.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mfra/errors.hpp"
#include "overloaded.hpp"

namespace mfra {

using json = nlohmann::json;
using detail::Overloaded;

namespace {

json vec_to_json(const Vector& v) {
  json a = json::array();
  for (Index k = 0; k < v.size(); ++k) a.push_back(v[k]);
  return a;
}

json mat_to_json(const DenseMatrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Vector vec_from_json(const json& a) {
  if (!a.is_array()) throw ParseError("expected an array of numbers");
  Vector v(static_cast<Index>(a.size()));
  for (size_t k = 0; k < a.size(); ++k) v[static_cast<Index>(k)] = a[k].get<double>();
  return v;
}

DenseMatrix mat_from_json(const json& a) {
  if (!a.is_array()) throw ParseError("expected an array of rows");
  const Index rows = static_cast<Index>(a.size());
  const Index cols = rows == 0 ? 0 : static_cast<Index>(a[0].size());
  DenseMatrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const json& row = a[static_cast<size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      throw ParseError("ragged matrix");
    }
    for (Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<size_t>(c)].get<double>();
  }
  return m;
}

const json& field(const json& obj, const char* name) {
  if (!obj.is_object() || !obj.contains(name)) {
    throw ParseError(std::string("missing field \"") + name + "\"");
  }
  return obj.at(name);
}

double num(const json& obj, const char* name) {
  const json& v = field(obj, name);
  if (!v.is_number()) {
    throw ParseError(std::string("field \"") + name + "\" must be a number");
  }
  return v.get<double>();
}

double num_or(const json& obj, const char* name, double fallback) {
  return obj.contains(name) ? num(obj, name) : fallback;
}

std::string kind_of(const json& obj) {
  const json& k = field(obj, "kind");
  if (!k.is_string()) throw ParseError("\"kind\" must be a string");
  return k.get<std::string>();
}

json utility_to_json(const ConcaveUtility& u) {
  return std::visit(
      Overloaded{
          [](const ZeroUtility&) { return json{{"kind", "zero"}}; },
          [](const QuadraticLatencyUtility& q) {
            return json{{"kind", "quadratic-latency"},
                        {"weight", q.weight},
                        {"demand", q.demand},
                        {"latency", vec_to_json(q.latency)}};
          },
          [](const LogRateUtility& l) {
            return json{{"kind", "log-rate"},
                        {"scale", l.scale},
                        {"selector", mat_to_json(l.selector)}};
          },
          [](const SeparableQuadraticUtility& s) {
            return json{{"kind", "separable-quadratic"},
                        {"curvature", vec_to_json(s.curvature)},
                        {"linear", vec_to_json(s.linear)}};
          },
          [](const CustomUtility&) -> json {
            throw UnsupportedError("custom utilities cannot be serialized");
          },
      },
      u.kind());
}

ConcaveUtility utility_from_json(const json& j) {
  const std::string kind = kind_of(j);
  if (kind == "zero") return ConcaveUtility::zero();
  if (kind == "quadratic-latency") {
    return ConcaveUtility::quadratic_latency(num(j, "weight"), num(j, "demand"),
                                             vec_from_json(field(j, "latency")));
  }
  if (kind == "log-rate") {
    return ConcaveUtility::log_rate(num(j, "scale"),
                                    mat_from_json(field(j, "selector")));
  }
  if (kind == "separable-quadratic") {
    return ConcaveUtility::separable_quadratic(
        vec_from_json(field(j, "curvature")), vec_from_json(field(j, "linear")));
  }
  throw ParseError("unknown utility kind \"" + kind + "\"");
}

json set_to_json(const FeasibleSet& s) {
  return std::visit(
      Overloaded{
          [](const ScaledSimplex& x) {
            return json{{"kind", "scaled-simplex"}, {"total", x.total}};
          },
          [](const BoxSet& b) {
            return json{{"kind", "box"},
                        {"lower", vec_to_json(b.lower)},
                        {"upper", vec_to_json(b.upper)}};
          },
          [](const CappedPathSet& p) {
            json out{{"kind", "nonneg-cap"}, {"cap", vec_to_json(p.cap)}};
            if (p.topology.size() > 0) out["topology"] = mat_to_json(p.topology);
            return out;
          },
          [](const CustomSet&) -> json {
            throw UnsupportedError("custom feasible sets cannot be serialized");
          },
      },
      s.kind());
}

FeasibleSet set_from_json(const json& j) {
  const std::string kind = kind_of(j);
  if (kind == "scaled-simplex") return FeasibleSet::scaled_simplex(num(j, "total"));
  if (kind == "box") {
    return FeasibleSet::box(vec_from_json(field(j, "lower")),
                            vec_from_json(field(j, "upper")));
  }
  if (kind == "nonneg-cap") {
    Vector cap = vec_from_json(field(j, "cap"));
    if (j.contains("topology")) {
      return FeasibleSet::path_image(mat_from_json(j.at("topology")),
                                     std::move(cap));
    }
    return FeasibleSet::nonneg_cap(std::move(cap));
  }
  throw ParseError("unknown feasible-set kind \"" + kind + "\"");
}

json cost_to_json(const ConvexCost& c) {
  return std::visit(
      Overloaded{
          [](const LinearCost& l) {
            return json{{"kind", "linear"},
                        {"slope", l.slope},
                        {"intercept", l.intercept}};
          },
          [](const EnergyCost& e) {
            return json{{"kind", "energy"},
                        {"energy_price", e.energy_price},
                        {"carbon_price", e.carbon_price},
                        {"pue", e.pue},
                        {"idle_power", e.idle_power},
                        {"peak_power", e.peak_power},
                        {"servers", e.servers}};
          },
          [](const PiecewiseLinearCost& p) {
            return json{{"kind", "piecewise-linear"},
                        {"breakpoints", p.breakpoints},
                        {"slopes", p.slopes},
                        {"value_at_zero", p.value_at_zero}};
          },
          [](const QuadraticCost& q) {
            return json{{"kind", "quadratic"}, {"a", q.a}, {"b", q.b}};
          },
          [](const CustomCost&) -> json {
            throw UnsupportedError("custom costs cannot be serialized");
          },
      },
      c.kind());
}

ConvexCost cost_from_json(const json& j) {
  const std::string kind = kind_of(j);
  if (kind == "linear") {
    return ConvexCost::linear(num(j, "slope"), num_or(j, "intercept", 0.0));
  }
  if (kind == "energy") {
    EnergyCost e;
    e.energy_price = num(j, "energy_price");
    e.carbon_price = num_or(j, "carbon_price", 0.0);
    e.pue = num(j, "pue");
    e.idle_power = num(j, "idle_power");
    e.peak_power = num(j, "peak_power");
    e.servers = num(j, "servers");
    return ConvexCost::energy(e);
  }
  if (kind == "piecewise-linear") {
    return ConvexCost::piecewise_linear(
        field(j, "breakpoints").get<std::vector<double>>(),
        field(j, "slopes").get<std::vector<double>>(),
        num_or(j, "value_at_zero", 0.0));
  }
  if (kind == "quadratic") return ConvexCost::quadratic(num(j, "a"), num(j, "b"));
  throw ParseError("unknown cost kind \"" + kind + "\"");
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
}

// Wraps library type errors (wrong value types deep in a document).
template <class F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed document: ") + e.what());
  }
}

}  // namespace

std::string instance_to_json(const ProblemInstance& inst, int indent) {
  json doc;
  doc["n"] = inst.num_facilities();
  json users = json::array();
  for (const UserSpec& u : inst.users()) {
    users.push_back(
        json{{"utility", utility_to_json(u.utility)}, {"feasible", set_to_json(u.feasible)}});
  }
  json facilities = json::array();
  for (const FacilitySpec& f : inst.facilities()) {
    facilities.push_back(json{{"cost", cost_to_json(f.cost)},
                              {"interval", json::array({f.lower, f.upper})}});
  }
  doc["users"] = std::move(users);
  doc["facilities"] = std::move(facilities);
  return doc.dump(indent);
}

ProblemInstance instance_from_json(const std::string& text) {
  const json doc = parse(text);
  return guarded([&] {
    const json& users_j = field(doc, "users");
    const json& fac_j = field(doc, "facilities");
    if (!users_j.is_array() || !fac_j.is_array()) {
      throw ParseError("\"users\" and \"facilities\" must be arrays");
    }
    if (doc.contains("n") &&
        doc.at("n").get<Index>() != static_cast<Index>(fac_j.size())) {
      throw ParseError("\"n\" disagrees with the number of facilities");
    }
    std::vector<UserSpec> users;
    users.reserve(users_j.size());
    for (const json& u : users_j) {
      users.push_back({utility_from_json(field(u, "utility")),
                       set_from_json(field(u, "feasible"))});
    }
    std::vector<FacilitySpec> facilities;
    facilities.reserve(fac_j.size());
    for (const json& f : fac_j) {
      const json& iv = field(f, "interval");
      if (!iv.is_array() || iv.size() != 2) {
        throw ParseError("\"interval\" must be [lo, hi]");
      }
      facilities.push_back(
          {cost_from_json(field(f, "cost")), iv[0].get<double>(), iv[1].get<double>()});
    }
    return ProblemInstance(std::move(users), std::move(facilities));
  });
}

std::string glb_spec_to_json(const GlbSpec& spec, int indent) {
  json doc;
  doc["q"] = spec.q;
  json users = json::array();
  for (const GlbUser& u : spec.users) {
    users.push_back(json{{"demand", u.demand}, {"latency", vec_to_json(u.latency)}});
  }
  json facilities = json::array();
  for (const GlbFacility& f : spec.facilities) {
    facilities.push_back(json{{"servers", f.servers},
                              {"energy_price", f.energy_price},
                              {"carbon_price", f.carbon_price},
                              {"pue", f.pue},
                              {"idle_power", f.idle_power},
                              {"peak_power", f.peak_power}});
  }
  json batch = json::array();
  for (const GlbBatch& b : spec.batch) {
    batch.push_back(json{{"home", b.home}, {"kind", "log"}, {"scale", b.scale}});
  }
  doc["users"] = std::move(users);
  doc["facilities"] = std::move(facilities);
  doc["batch"] = std::move(batch);
  return doc.dump(indent);
}

GlbSpec glb_spec_from_json(const std::string& text) {
  const json doc = parse(text);
  return guarded([&] {
    GlbSpec spec;
    spec.q = num_or(doc, "q", kDefaultLatencyWeight);
    for (const json& u : field(doc, "users")) {
      spec.users.push_back({num(u, "demand"), vec_from_json(field(u, "latency"))});
    }
    for (const json& f : field(doc, "facilities")) {
      GlbFacility g;
      g.servers = num(f, "servers");
      g.energy_price = num(f, "energy_price");
      g.carbon_price = num_or(f, "carbon_price", g.carbon_price);
      g.pue = num_or(f, "pue", g.pue);
      g.idle_power = num_or(f, "idle_power", g.idle_power);
      g.peak_power = num_or(f, "peak_power", g.peak_power);
      spec.facilities.push_back(g);
    }
    if (doc.contains("batch")) {
      for (const json& b : doc.at("batch")) {
        if (b.contains("kind") && b.at("kind") != "log") {
          throw ParseError("batch utilities must be of kind \"log\"");
        }
        spec.batch.push_back({field(b, "home").get<Index>(), num_or(b, "scale", 1.0)});
      }
    }
    return spec;
  });
}

std::string te_spec_to_json(const TeSpec& spec, int indent) {
  json doc;
  doc["links"] = spec.link_capacity;
  json flows = json::array();
  for (const TeFlow& f : spec.flows) {
    flows.push_back(json{{"paths", f.paths}, {"kind", "log-rate"}, {"scale", f.scale}});
  }
  doc["flows"] = std::move(flows);
  json congestion = json::array();
  for (const PiecewiseLinearCost& c : spec.congestion) {
    congestion.push_back(json{{"breakpoints", c.breakpoints},
                              {"slopes", c.slopes},
                              {"value_at_zero", c.value_at_zero}});
  }
  doc["congestion"] = std::move(congestion);
  doc["bandwidth_price"] = spec.bandwidth_price;
  doc["congestion_base_slope"] = spec.congestion_base_slope;
  return doc.dump(indent);
}

TeSpec te_spec_from_json(const std::string& text) {
  const json doc = parse(text);
  return guarded([&] {
    TeSpec spec;
    spec.link_capacity = field(doc, "links").get<std::vector<double>>();
    for (const json& f : field(doc, "flows")) {
      TeFlow flow;
      flow.paths = field(f, "paths").get<std::vector<std::vector<Index>>>();
      flow.scale = num_or(f, "scale", 1.0);
      spec.flows.push_back(std::move(flow));
    }
    if (doc.contains("congestion")) {
      for (const json& c : doc.at("congestion")) {
        spec.congestion.push_back({field(c, "breakpoints").get<std::vector<double>>(),
                                   field(c, "slopes").get<std::vector<double>>(),
                                   num_or(c, "value_at_zero", 0.0)});
      }
    }
    if (doc.contains("bandwidth_price")) {
      spec.bandwidth_price = doc.at("bandwidth_price").get<std::vector<double>>();
    }
    spec.congestion_base_slope =
        num_or(doc, "congestion_base_slope", spec.congestion_base_slope);
    return spec;
  });
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path + " for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed on " + path);
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write failed on " + path);
}

}  // namespace mfra
