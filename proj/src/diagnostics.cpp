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

#include "mfra/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "mfra/errors.hpp"

namespace mfra {

AllocationMatrix SolverState::z() const {
  const Vector shift = (u_prev - u) / static_cast<double>(num_users());
  AllocationMatrix out = x;
  out.rowwise() += shift.transpose();
  return out;
}

namespace {

void require_same_shape(const SolverState& a, const SolverState& b) {
  if (a.x.rows() != b.x.rows() || a.x.cols() != b.x.cols()) {
    throw ShapeError("states have different dimensions");
  }
}

}  // namespace

double compute_Dk(const SolverState& current, const SolverState& next) {
  require_same_shape(current, next);
  const Index N = current.num_users();
  const Index n = current.num_facilities();
  const double inv_n = 1.0 / static_cast<double>(N);
  // z_i^{k+1} - z_i^k = (x_i^{k+1} - x_i^k) + shift
  const Vector shift =
      ((next.u_prev - next.u) - (current.u_prev - current.u)) * inv_n;
  double total = 0.0;
  for (Index i = 0; i < N; ++i) {
    for (Index j = 0; j < n; ++j) {
      const double dz = (next.x(i, j) - current.x(i, j)) + shift[j];
      total += dz * dz;
    }
  }
  const Vector dv = (next.u - current.u) * inv_n;
  total += static_cast<double>(N) * dv.squaredNorm();
  return total;
}

double compute_Vk(const SolverState& state, const ReferenceSolution& ref) {
  const Index N = state.num_users();
  if (ref.z_star.rows() != N || ref.z_star.cols() != state.num_facilities()) {
    throw ShapeError("reference solution does not match the state");
  }
  const AllocationMatrix z = state.z();
  double total = (z - ref.z_star).squaredNorm();
  total += static_cast<double>(N) * (state.v() - ref.v_star).squaredNorm();
  return total;
}

PrimalResidual compute_primal_residual(const SolverState& state) {
  const Index N = state.num_users();
  // x_i - z_i = v^k - v^{k-1} for every user.
  const Vector gap = (state.u - state.u_prev) / static_cast<double>(N);
  PrimalResidual r;
  for (Index i = 0; i < N; ++i) r.from_z += gap.squaredNorm();
  r.from_v = (state.u - state.u_prev).squaredNorm() / static_cast<double>(N);
  return r;
}

double coupling_residual(const SolverState& state) {
  return (column_sums(state.x) - state.y).squaredNorm();
}

RateFit fit_rate(const std::vector<double>& values, Index k0, Index k1,
                 RateModel model) {
  if (k0 < 0 || k1 < k0 || k1 >= static_cast<Index>(values.size())) {
    throw ParameterError("rate-fit window out of range");
  }
  if (k1 - k0 + 1 < 10) {
    throw ParameterError("rate-fit window needs at least 10 rows");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(k1 - k0 + 1);
  std::vector<double> xs, ys;
  for (Index k = k0; k <= k1; ++k) {
    const double v = values[static_cast<size_t>(k)];
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw DomainError("rate fit needs positive values; index " +
                        std::to_string(k) + " is " + std::to_string(v));
    }
    const double xv = model == RateModel::kSublinear
                          ? std::log(static_cast<double>(k) + 1.0)
                          : static_cast<double>(k);
    const double yv = std::log(v);
    xs.push_back(xv);
    ys.push_back(yv);
    sx += xv;
    sy += yv;
    sxx += xv * xv;
    sxy += xv * yv;
  }
  const double denom = m * sxx - sx * sx;
  const double slope = (m * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / m;
  const double mean_y = sy / m;
  double ss_res = 0, ss_tot = 0;
  for (size_t t = 0; t < xs.size(); ++t) {
    const double pred = intercept + slope * xs[t];
    ss_res += (ys[t] - pred) * (ys[t] - pred);
    ss_tot += (ys[t] - mean_y) * (ys[t] - mean_y);
  }
  RateFit fit;
  fit.k0 = k0;
  fit.k1 = k1;
  fit.model = model;
  fit.constant = std::exp(intercept);
  if (model == RateModel::kSublinear) {
    fit.exponent = slope;
  } else {
    fit.a = std::exp(-slope);
  }
  fit.r_squared = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0)
                               : (ss_res == 0.0 ? 1.0 : 0.0);
  return fit;
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

}  // namespace

void write_trace_csv(std::ostream& out, const ConvergenceMetrics& metrics) {
  out << "iter,objective,Dk,Vk,primal_residual,coupling_residual,comm_rounds,"
         "wall_ms\n";
  for (const MetricsRow& r : metrics.rows) {
    out << r.iter << ',' << format_double(r.objective) << ','
        << format_double(r.dk) << ',' << format_optional(r.vk) << ','
        << format_optional(r.primal_residual) << ','
        << format_double(r.coupling_residual) << ',' << r.comm_rounds << ','
        << format_optional(r.wall_ms) << '\n';
  }
}

}  // namespace mfra
