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

#ifndef MFRA_CORE_MODEL_HPP_
#define MFRA_CORE_MODEL_HPP_

// Problem model: N users drawing resources from n facilities.
//
//   maximize   sum_i f_i(x_i) - sum_j g_j(y_j)
//   subject to x_i in X_i            for every user i
//              y_j = sum_i x_ij      for every facility j
//              y_j in [lo_j, hi_j]
//
// f_i is concave (ConcaveUtility), g_j convex (ConvexCost), X_i a bounded
// convex set (FeasibleSet). Instances are immutable after construction.

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <variant>
#include <vector>

namespace mfra {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
// One row per user, one column per facility.
using AllocationMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// ---------------------------------------------------------------------------
// Utilities
// ---------------------------------------------------------------------------

struct ZeroUtility {};

// f(x) = -q * t * (l.x / t)^2, the squared average latency penalty of one
// user with total demand t.
struct QuadraticLatencyUtility {
  double weight = 0.0;  // q
  double demand = 1.0;  // t
  Vector latency;       // l, seconds
};

// f(x) = scale * sum_p log(1 + (S x)_p). S maps link- or facility-space
// allocations onto the coordinates the utility actually depends on (a
// topology left-inverse for traffic engineering, a one-hot row for batch
// users).
struct LogRateUtility {
  double scale = 1.0;
  DenseMatrix selector;
};

// f(x) = sum_j (b_j x_j - a_j/2 x_j^2) with a_j > 0: strictly concave with a
// Lipschitz gradient.
struct SeparableQuadraticUtility {
  Vector curvature;  // a
  Vector linear;     // b
};

struct CustomUtility {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
};

class ConcaveUtility {
 public:
  using Kind = std::variant<ZeroUtility, QuadraticLatencyUtility,
                            LogRateUtility, SeparableQuadraticUtility,
                            CustomUtility>;

  ConcaveUtility() = default;

  static ConcaveUtility zero();
  static ConcaveUtility quadratic_latency(double weight, double demand,
                                          Vector latency);
  static ConcaveUtility log_rate(double scale, DenseMatrix selector);
  static ConcaveUtility separable_quadratic(Vector curvature, Vector linear);
  static ConcaveUtility custom(std::function<double(const Vector&)> value,
                               std::function<Vector(const Vector&)> gradient);

  const Kind& kind() const { return kind_; }

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;

  // Throws ShapeError when the utility cannot act on vectors of length n.
  void check_dimension(Index n) const;

 private:
  explicit ConcaveUtility(Kind kind) : kind_(std::move(kind)) {}
  Kind kind_ = ZeroUtility{};
};

// ---------------------------------------------------------------------------
// Feasible sets
// ---------------------------------------------------------------------------

// {x >= 0 : sum x = total}
struct ScaledSimplex {
  double total = 1.0;
};

struct BoxSet {
  Vector lower;
  Vector upper;
};

// {A w : 0 <= w <= cap}. With an empty topology A is the identity, which
// gives the capped nonnegative orthant. For traffic engineering A is the
// link-by-path topology matrix of one flow.
struct CappedPathSet {
  DenseMatrix topology;
  Vector cap;
};

struct CustomSet {
  std::function<Vector(const Vector&)> project;
};

class FeasibleSet {
 public:
  using Kind = std::variant<ScaledSimplex, BoxSet, CappedPathSet, CustomSet>;

  FeasibleSet() = default;

  static FeasibleSet scaled_simplex(double total);
  static FeasibleSet box(Vector lower, Vector upper);
  static FeasibleSet nonneg_cap(Vector cap);
  static FeasibleSet path_image(DenseMatrix topology, Vector cap);
  static FeasibleSet custom(std::function<Vector(const Vector&)> project);

  const Kind& kind() const { return kind_; }

  // Euclidean projection onto the set.
  Vector project(const Vector& v) const;

  // Infinity-norm distance from v to its projection.
  double violation(const Vector& v) const;

  void check_dimension(Index n) const;

 private:
  explicit FeasibleSet(Kind kind) : kind_(std::move(kind)) {}
  Kind kind_ = ScaledSimplex{};
};

// ---------------------------------------------------------------------------
// Costs
// ---------------------------------------------------------------------------

struct LinearCost {
  double slope = 0.0;      // $ per unit
  double intercept = 0.0;  // $
};

// g(y) = (P^E + P^C) * PUE * (c * P_idle + (P_peak - P_idle) * y)
struct EnergyCost {
  double energy_price = 0.0;  // $/kWh
  double carbon_price = 0.0;  // $/kWh
  double pue = 1.0;
  double idle_power = 0.0;  // W
  double peak_power = 0.0;  // W
  double servers = 0.0;     // c_j

  double slope() const {
    return (energy_price + carbon_price) * pue * (peak_power - idle_power);
  }
};

// Convex piecewise-linear function with value_at_zero at y = 0. Piece k spans
// [breakpoints[k-1], breakpoints[k]] and has slope slopes[k]; the first and
// last pieces extend to -inf and +inf.
struct PiecewiseLinearCost {
  std::vector<double> breakpoints;
  std::vector<double> slopes;
  double value_at_zero = 0.0;
};

// g(y) = a y^2 + b y, a > 0.
struct QuadraticCost {
  double a = 1.0;
  double b = 0.0;
};

struct CustomCost {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
};

class ConvexCost {
 public:
  using Kind = std::variant<LinearCost, EnergyCost, PiecewiseLinearCost,
                            QuadraticCost, CustomCost>;

  ConvexCost() = default;

  static ConvexCost linear(double slope, double intercept = 0.0);
  static ConvexCost energy(const EnergyCost& params);
  static ConvexCost piecewise_linear(std::vector<double> breakpoints,
                                     std::vector<double> slopes,
                                     double value_at_zero = 0.0);
  static ConvexCost quadratic(double a, double b);
  static ConvexCost custom(std::function<double(double)> value,
                           std::function<double(double)> derivative);

  const Kind& kind() const { return kind_; }

  double value(double y) const;
  // Right derivative (a subgradient at kinks).
  double derivative(double y) const;
  // Left derivative; equals derivative() away from kinks.
  double left_derivative(double y) const;

 private:
  explicit ConvexCost(Kind kind) : kind_(std::move(kind)) {}
  Kind kind_ = LinearCost{};
};

// ---------------------------------------------------------------------------
// Instance
// ---------------------------------------------------------------------------

struct UserSpec {
  ConcaveUtility utility;
  FeasibleSet feasible;
};

struct FacilitySpec {
  ConvexCost cost;
  double lower = 0.0;
  double upper = 0.0;
};

class ProblemInstance {
 public:
  // Validates dimensions and intervals; throws ShapeError / DomainError.
  ProblemInstance(std::vector<UserSpec> users,
                  std::vector<FacilitySpec> facilities);

  Index num_users() const { return static_cast<Index>(users_.size()); }
  Index num_facilities() const {
    return static_cast<Index>(facilities_.size());
  }

  const std::vector<UserSpec>& users() const { return users_; }
  const std::vector<FacilitySpec>& facilities() const { return facilities_; }
  const UserSpec& user(Index i) const { return users_[static_cast<size_t>(i)]; }
  const FacilitySpec& facility(Index j) const {
    return facilities_[static_cast<size_t>(j)];
  }

 private:
  std::vector<UserSpec> users_;
  std::vector<FacilitySpec> facilities_;
};

struct FeasibilityReport {
  double max_x_violation = 0.0;
  double max_y_violation = 0.0;
  double max_coupling_violation = 0.0;
  bool feasible = false;
};

// sum_i f_i(x_i) - sum_j g_j(sum_i x_ij), summed in ascending index order.
double evaluate_objective(const ProblemInstance& inst,
                          const AllocationMatrix& x);

double project_feasible_y(const FacilitySpec& spec, double y);

FeasibilityReport check_feasibility(const ProblemInstance& inst,
                                    const AllocationMatrix& x, const Vector& y,
                                    double tol);

// Column sums of x in ascending row order.
Vector column_sums(const AllocationMatrix& x);

}  // namespace mfra

#endif  // MFRA_CORE_MODEL_HPP_
