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

#include "mfra/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "mfra/errors.hpp"
#include "mfra/subproblems.hpp"
#include "overloaded.hpp"

namespace mfra {
namespace {

using detail::Overloaded;

bool all_finite(const Vector& v) { return v.allFinite(); }

void require_dimension(Index got, Index want, const char* what) {
  if (got != want) {
    std::ostringstream msg;
    msg << what << " has dimension " << got << ", expected " << want;
    throw ShapeError(msg.str());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// ConcaveUtility

ConcaveUtility ConcaveUtility::zero() { return ConcaveUtility(ZeroUtility{}); }

ConcaveUtility ConcaveUtility::quadratic_latency(double weight, double demand,
                                                 Vector latency) {
  if (!(weight >= 0.0) || !std::isfinite(weight)) {
    throw ParameterError("quadratic-latency weight q must be >= 0");
  }
  if (!(demand > 0.0) || !std::isfinite(demand)) {
    throw ParameterError("quadratic-latency demand t must be > 0");
  }
  if (!all_finite(latency) || (latency.size() > 0 && latency.minCoeff() < 0.0)) {
    throw ParameterError("latencies must be finite and >= 0");
  }
  return ConcaveUtility(QuadraticLatencyUtility{weight, demand, std::move(latency)});
}

ConcaveUtility ConcaveUtility::log_rate(double scale, DenseMatrix selector) {
  if (!(scale >= 0.0) || !std::isfinite(scale)) {
    throw ParameterError("log-rate scale must be >= 0");
  }
  if (!selector.allFinite() || selector.size() == 0) {
    throw ParameterError("log-rate selector must be a finite nonempty matrix");
  }
  return ConcaveUtility(LogRateUtility{scale, std::move(selector)});
}

ConcaveUtility ConcaveUtility::separable_quadratic(Vector curvature,
                                                   Vector linear) {
  if (curvature.size() != linear.size()) {
    throw ShapeError("separable-quadratic coefficient vectors differ in length");
  }
  if (!all_finite(curvature) || !all_finite(linear) ||
      (curvature.size() > 0 && curvature.minCoeff() <= 0.0)) {
    throw ParameterError("separable-quadratic curvature must be finite and > 0");
  }
  return ConcaveUtility(
      SeparableQuadraticUtility{std::move(curvature), std::move(linear)});
}

ConcaveUtility ConcaveUtility::custom(
    std::function<double(const Vector&)> value,
    std::function<Vector(const Vector&)> gradient) {
  if (!value || !gradient) {
    throw ParameterError("custom utility needs both value and gradient");
  }
  return ConcaveUtility(CustomUtility{std::move(value), std::move(gradient)});
}

double ConcaveUtility::value(const Vector& x) const {
  return std::visit(
      Overloaded{
          [](const ZeroUtility&) { return 0.0; },
          [&](const QuadraticLatencyUtility& u) {
            const double avg = u.latency.dot(x) / u.demand;
            return -u.weight * u.demand * avg * avg;
          },
          [&](const LogRateUtility& u) {
            const Vector w = u.selector * x;
            double total = 0.0;
            for (Index p = 0; p < w.size(); ++p) {
              if (w[p] <= -1.0) return -std::numeric_limits<double>::infinity();
              total += std::log1p(w[p]);
            }
            return u.scale * total;
          },
          [&](const SeparableQuadraticUtility& u) {
            double total = 0.0;
            for (Index j = 0; j < x.size(); ++j) {
              total += u.linear[j] * x[j] - 0.5 * u.curvature[j] * x[j] * x[j];
            }
            return total;
          },
          [&](const CustomUtility& u) { return u.value(x); },
      },
      kind_);
}

Vector ConcaveUtility::gradient(const Vector& x) const {
  return std::visit(
      Overloaded{
          [&](const ZeroUtility&) -> Vector { return Vector::Zero(x.size()); },
          [&](const QuadraticLatencyUtility& u) -> Vector {
            return (-2.0 * u.weight * u.latency.dot(x) / u.demand) * u.latency;
          },
          [&](const LogRateUtility& u) -> Vector {
            Vector w = u.selector * x;
            for (Index p = 0; p < w.size(); ++p) w[p] = u.scale / (1.0 + w[p]);
            return u.selector.transpose() * w;
          },
          [&](const SeparableQuadraticUtility& u) -> Vector {
            return u.linear - u.curvature.cwiseProduct(x);
          },
          [&](const CustomUtility& u) -> Vector { return u.gradient(x); },
      },
      kind_);
}

void ConcaveUtility::check_dimension(Index n) const {
  std::visit(Overloaded{
                 [](const ZeroUtility&) {},
                 [&](const QuadraticLatencyUtility& u) {
                   require_dimension(u.latency.size(), n, "latency vector");
                 },
                 [&](const LogRateUtility& u) {
                   require_dimension(u.selector.cols(), n, "log-rate selector");
                 },
                 [&](const SeparableQuadraticUtility& u) {
                   require_dimension(u.curvature.size(), n,
                                     "separable-quadratic coefficients");
                 },
                 [](const CustomUtility&) {},
             },
             kind_);
}

// ---------------------------------------------------------------------------
// FeasibleSet

FeasibleSet FeasibleSet::scaled_simplex(double total) {
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw ParameterError("scaled simplex total must be > 0");
  }
  return FeasibleSet(ScaledSimplex{total});
}

FeasibleSet FeasibleSet::box(Vector lower, Vector upper) {
  if (lower.size() != upper.size()) {
    throw ShapeError("box bounds differ in length");
  }
  if (!all_finite(lower) || !all_finite(upper)) {
    throw DomainError("box bounds must be finite");
  }
  for (Index j = 0; j < lower.size(); ++j) {
    if (lower[j] > upper[j]) {
      throw DomainError("box lower bound exceeds upper bound at coordinate " +
                        std::to_string(j));
    }
  }
  return FeasibleSet(BoxSet{std::move(lower), std::move(upper)});
}

FeasibleSet FeasibleSet::nonneg_cap(Vector cap) {
  return path_image(DenseMatrix(), std::move(cap));
}

FeasibleSet FeasibleSet::path_image(DenseMatrix topology, Vector cap) {
  if (!all_finite(cap) || (cap.size() > 0 && cap.minCoeff() < 0.0)) {
    throw DomainError("caps must be finite and >= 0");
  }
  if (topology.size() > 0 && topology.cols() != cap.size()) {
    throw ShapeError("topology has " + std::to_string(topology.cols()) +
                     " paths but " + std::to_string(cap.size()) + " caps");
  }
  return FeasibleSet(CappedPathSet{std::move(topology), std::move(cap)});
}

FeasibleSet FeasibleSet::custom(std::function<Vector(const Vector&)> project) {
  if (!project) throw ParameterError("custom set needs a projection");
  return FeasibleSet(CustomSet{std::move(project)});
}

Vector FeasibleSet::project(const Vector& v) const {
  return std::visit(
      Overloaded{
          [&](const ScaledSimplex& s) -> Vector {
            return project_scaled_simplex(v, s.total);
          },
          [&](const BoxSet& b) -> Vector {
            return v.cwiseMax(b.lower).cwiseMin(b.upper);
          },
          [&](const CappedPathSet& p) -> Vector {
            return project_capped_path(p, v);
          },
          [&](const CustomSet& c) -> Vector { return c.project(v); },
      },
      kind_);
}

double FeasibleSet::violation(const Vector& v) const {
  if (v.size() == 0) return 0.0;
  return (v - project(v)).cwiseAbs().maxCoeff();
}

void FeasibleSet::check_dimension(Index n) const {
  std::visit(Overloaded{
                 [](const ScaledSimplex&) {},
                 [&](const BoxSet& b) {
                   require_dimension(b.lower.size(), n, "box set");
                 },
                 [&](const CappedPathSet& p) {
                   if (p.topology.size() > 0) {
                     require_dimension(p.topology.rows(), n, "path topology");
                   } else {
                     require_dimension(p.cap.size(), n, "cap vector");
                   }
                 },
                 [](const CustomSet&) {},
             },
             kind_);
}

// ---------------------------------------------------------------------------
// ConvexCost

ConvexCost ConvexCost::linear(double slope, double intercept) {
  if (!std::isfinite(slope) || !std::isfinite(intercept)) {
    throw ParameterError("linear cost coefficients must be finite");
  }
  return ConvexCost(LinearCost{slope, intercept});
}

ConvexCost ConvexCost::energy(const EnergyCost& p) {
  const double fields[] = {p.energy_price, p.carbon_price, p.pue,
                           p.idle_power,   p.peak_power,   p.servers};
  for (double f : fields) {
    if (!std::isfinite(f)) throw ParameterError("energy cost fields must be finite");
  }
  if (p.idle_power > p.peak_power) {
    throw ParameterError("idle power exceeds peak power");
  }
  return ConvexCost(p);
}

ConvexCost ConvexCost::piecewise_linear(std::vector<double> breakpoints,
                                        std::vector<double> slopes,
                                        double value_at_zero) {
  if (slopes.size() != breakpoints.size() + 1) {
    throw ShapeError("piecewise-linear cost needs one more slope than breakpoints");
  }
  for (size_t k = 1; k < breakpoints.size(); ++k) {
    if (!(breakpoints[k] > breakpoints[k - 1])) {
      throw ParameterError("piecewise-linear breakpoints must be strictly increasing");
    }
  }
  for (size_t k = 1; k < slopes.size(); ++k) {
    if (!(slopes[k] > slopes[k - 1])) {
      throw ParameterError("piecewise-linear slopes must be strictly increasing");
    }
  }
  for (double b : breakpoints) {
    if (!std::isfinite(b)) throw ParameterError("breakpoints must be finite");
  }
  for (double s : slopes) {
    if (!std::isfinite(s)) throw ParameterError("slopes must be finite");
  }
  return ConvexCost(PiecewiseLinearCost{std::move(breakpoints),
                                        std::move(slopes), value_at_zero});
}

ConvexCost ConvexCost::quadratic(double a, double b) {
  if (!(a > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw ParameterError("quadratic cost needs finite a > 0");
  }
  return ConvexCost(QuadraticCost{a, b});
}

ConvexCost ConvexCost::custom(std::function<double(double)> value,
                              std::function<double(double)> derivative) {
  if (!value || !derivative) {
    throw ParameterError("custom cost needs both value and derivative");
  }
  return ConvexCost(CustomCost{std::move(value), std::move(derivative)});
}

namespace {

double piecewise_value(const PiecewiseLinearCost& c, double y) {
  const double inf = std::numeric_limits<double>::infinity();
  double total = c.value_at_zero;
  const size_t m = c.slopes.size();
  for (size_t k = 0; k < m; ++k) {
    const double lo = k == 0 ? -inf : c.breakpoints[k - 1];
    const double hi = k + 1 == m ? inf : c.breakpoints[k];
    const double len = std::clamp(y, lo, hi) - std::clamp(0.0, lo, hi);
    if (len != 0.0) total += c.slopes[k] * len;
  }
  return total;
}

double piecewise_slope(const PiecewiseLinearCost& c, double y, bool right) {
  size_t k = 0;
  while (k < c.breakpoints.size() &&
         (right ? y >= c.breakpoints[k] : y > c.breakpoints[k])) {
    ++k;
  }
  return c.slopes[k];
}

}  // namespace

double ConvexCost::value(double y) const {
  return std::visit(
      Overloaded{
          [&](const LinearCost& c) { return c.slope * y + c.intercept; },
          [&](const EnergyCost& c) {
            return (c.energy_price + c.carbon_price) * c.pue *
                   (c.servers * c.idle_power + (c.peak_power - c.idle_power) * y);
          },
          [&](const PiecewiseLinearCost& c) { return piecewise_value(c, y); },
          [&](const QuadraticCost& c) { return c.a * y * y + c.b * y; },
          [&](const CustomCost& c) { return c.value(y); },
      },
      kind_);
}

double ConvexCost::derivative(double y) const {
  return std::visit(
      Overloaded{
          [](const LinearCost& c) { return c.slope; },
          [](const EnergyCost& c) { return c.slope(); },
          [&](const PiecewiseLinearCost& c) { return piecewise_slope(c, y, true); },
          [&](const QuadraticCost& c) { return 2.0 * c.a * y + c.b; },
          [&](const CustomCost& c) { return c.derivative(y); },
      },
      kind_);
}

double ConvexCost::left_derivative(double y) const {
  if (const auto* pwl = std::get_if<PiecewiseLinearCost>(&kind_)) {
    return piecewise_slope(*pwl, y, false);
  }
  return derivative(y);
}

// ---------------------------------------------------------------------------
// ProblemInstance

ProblemInstance::ProblemInstance(std::vector<UserSpec> users,
                                 std::vector<FacilitySpec> facilities)
    : users_(std::move(users)), facilities_(std::move(facilities)) {
  if (users_.empty()) throw ShapeError("instance needs at least one user");
  if (facilities_.empty()) {
    throw ShapeError("instance needs at least one facility");
  }
  const Index n = num_facilities();
  for (size_t i = 0; i < users_.size(); ++i) {
    try {
      users_[i].utility.check_dimension(n);
      users_[i].feasible.check_dimension(n);
    } catch (const ShapeError& e) {
      throw ShapeError("user " + std::to_string(i) + ": " + e.what());
    }
  }
  for (size_t j = 0; j < facilities_.size(); ++j) {
    const auto& f = facilities_[j];
    if (!std::isfinite(f.lower) || !std::isfinite(f.upper) || f.lower > f.upper) {
      throw DomainError("facility " + std::to_string(j) +
                        ": interval must be finite with lower <= upper");
    }
  }
}

// ---------------------------------------------------------------------------
// Operations

Vector column_sums(const AllocationMatrix& x) {
  Vector sums = Vector::Zero(x.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) sums[j] += x(i, j);
  }
  return sums;
}

double evaluate_objective(const ProblemInstance& inst,
                          const AllocationMatrix& x) {
  const Index N = inst.num_users();
  const Index n = inst.num_facilities();
  if (x.rows() != N || x.cols() != n) {
    throw ShapeError("allocation is " + std::to_string(x.rows()) + "x" +
                     std::to_string(x.cols()) + ", instance is " +
                     std::to_string(N) + "x" + std::to_string(n));
  }
  if (!x.allFinite()) throw DomainError("allocation has a non-finite entry");

  double utility = 0.0;
  Vector row(n);
  for (Index i = 0; i < N; ++i) {
    row = x.row(i).transpose();
    utility += inst.user(i).utility.value(row);
  }
  const Vector y = column_sums(x);
  double cost = 0.0;
  for (Index j = 0; j < n; ++j) cost += inst.facility(j).cost.value(y[j]);
  return utility - cost;
}

double project_feasible_y(const FacilitySpec& spec, double y) {
  return std::clamp(y, spec.lower, spec.upper);
}

FeasibilityReport check_feasibility(const ProblemInstance& inst,
                                    const AllocationMatrix& x, const Vector& y,
                                    double tol) {
  const Index N = inst.num_users();
  const Index n = inst.num_facilities();
  if (x.rows() != N || x.cols() != n || y.size() != n) {
    throw ShapeError("feasibility check: shapes disagree with the instance");
  }
  FeasibilityReport report;
  Vector row(n);
  for (Index i = 0; i < N; ++i) {
    row = x.row(i).transpose();
    report.max_x_violation =
        std::max(report.max_x_violation, inst.user(i).feasible.violation(row));
  }
  const Vector sums = column_sums(x);
  for (Index j = 0; j < n; ++j) {
    const auto& f = inst.facility(j);
    report.max_y_violation =
        std::max(report.max_y_violation, std::abs(y[j] - project_feasible_y(f, y[j])));
    report.max_coupling_violation =
        std::max(report.max_coupling_violation, std::abs(sums[j] - y[j]));
  }
  report.feasible = report.max_x_violation <= tol &&
                    report.max_y_violation <= tol &&
                    report.max_coupling_violation <= tol;
  return report;
}

}  // namespace mfra
