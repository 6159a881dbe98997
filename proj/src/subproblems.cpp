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

#include "mfra/subproblems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mfra/errors.hpp"
#include "overloaded.hpp"

namespace mfra {
namespace {

using detail::Overloaded;

constexpr double kInf = std::numeric_limits<double>::infinity();

double inf_norm(const Vector& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Projected gradient with Barzilai-Borwein steps and Armijo backtracking along
// the projection arc. Used for the subproblem shapes without a closed form.

struct SmoothProblem {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Vector(const Vector&)> project;
  double curvature = 1.0;  // scale for the first step and the stopping test
};

struct DescentResult {
  Vector point;
  int iterations = 0;
};

DescentResult projected_gradient(const SmoothProblem& p, const Vector& start,
                                 double tol, int max_iters) {
  const double ref_step = 1.0 / p.curvature;
  Vector w = p.project(start);
  double f = p.value(w);
  Vector g = p.gradient(w);
  double alpha = ref_step;
  int it = 0;
  for (; it < max_iters; ++it) {
    const double scale = 1.0 + inf_norm(w);
    if (inf_norm(w - p.project(w - ref_step * g)) <= tol * scale) break;

    Vector wn;
    double fn = kInf;
    bool accepted = false;
    for (int bt = 0; bt < 80; ++bt) {
      wn = p.project(w - alpha * g);
      fn = p.value(wn);
      if (inf_norm(wn - w) <= 1e-16 * scale) {
        accepted = true;
        break;
      }
      if (std::isfinite(fn) && fn <= f + 1e-4 * g.dot(wn - w)) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted || inf_norm(wn - w) <= 1e-16 * scale) {
      if (accepted) w = wn;
      break;
    }
    const Vector gn = p.gradient(wn);
    const Vector s = wn - w;
    const Vector yv = gn - g;
    const double sy = s.dot(yv);
    alpha = sy > 0.0 ? s.squaredNorm() / sy : ref_step;
    alpha = std::clamp(alpha, 1e-12 * ref_step, 1e12 * ref_step);
    w = wn;
    f = fn;
    g = gn;
  }
  return {w, it};
}

constexpr double kDescentTol = 1e-13;
constexpr int kDescentMaxIters = 100000;

// Generic user prox: works for every utility with a gradient and every set
// with a projection. Path-image sets are optimized in path coordinates.
ProxResult generic_user_prox(const ConcaveUtility& utility,
                             const FeasibleSet& set, const Vector& anchor,
                             double rho) {
  if (const auto* path = std::get_if<CappedPathSet>(&set.kind());
      path != nullptr && path->topology.size() > 0) {
    const DenseMatrix& A = path->topology;
    const Vector cap = path->cap;
    SmoothProblem p;
    p.value = [&](const Vector& w) {
      const Vector x = A * w;
      return -utility.value(x) + 0.5 * rho * (x - anchor).squaredNorm();
    };
    p.gradient = [&](const Vector& w) -> Vector {
      const Vector x = A * w;
      return A.transpose() * (-utility.gradient(x) + rho * (x - anchor));
    };
    p.project = [&](const Vector& w) -> Vector {
      return w.cwiseMax(0.0).cwiseMin(cap);
    };
    const double norm_a = A.operatorNorm();
    p.curvature = rho * norm_a * norm_a;
    const Vector start =
        (A.transpose() * A).ldlt().solve(A.transpose() * anchor);
    const DescentResult r =
        projected_gradient(p, start, kDescentTol, kDescentMaxIters);
    ProxResult out;
    out.minimizer = A * r.point;
    out.subproblem_value = p.value(r.point);
    out.iterations_used = r.iterations;
    return out;
  }

  SmoothProblem p;
  p.value = [&](const Vector& x) {
    return -utility.value(x) + 0.5 * rho * (x - anchor).squaredNorm();
  };
  p.gradient = [&](const Vector& x) -> Vector {
    return -utility.gradient(x) + rho * (x - anchor);
  };
  p.project = [&](const Vector& x) -> Vector { return set.project(x); };
  p.curvature = rho;
  const DescentResult r =
      projected_gradient(p, anchor, kDescentTol, kDescentMaxIters);
  ProxResult out;
  out.minimizer = r.point;
  out.subproblem_value = p.value(r.point);
  out.iterations_used = r.iterations;
  return out;
}

// argmin over the simplex {x >= 0, sum x = t} of (q/t)(l.x)^2 + rho/2 |x-a|^2.
//
// For a fixed value s of l.x the minimizer is P(a - c s l) with c = 2q/(t rho),
// and h(s) = s - l.P(a - c s l) is nondecreasing, so the true s is the root of
// h on [t min l, t max l]. Bisection isolates the active support, after which
// the two stationarity equations are solved exactly on that support.
ProxResult latency_simplex_prox(const QuadraticLatencyUtility& u, double total,
                                const Vector& anchor, double rho) {
  const Vector& l = u.latency;
  const double c = 2.0 * u.weight / (u.demand * rho);
  ProxResult out;
  if (c == 0.0 || l.isZero(0.0)) {
    out.minimizer = project_scaled_simplex(anchor, total);
  } else {
    auto at = [&](double s) { return project_scaled_simplex(anchor - (c * s) * l, total); };
    double lo = total * l.minCoeff();
    double hi = total * l.maxCoeff();
    int it = 0;
    for (; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (mid - l.dot(at(mid)) > 0.0) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    double s = 0.5 * (lo + hi);
    Vector x = at(s);
    out.iterations_used = it;

    // Exact solve on the support found by bisection.
    double m = 0.0, sum_a = 0.0, sum_l = 0.0, sum_ll = 0.0, sum_la = 0.0;
    for (Index j = 0; j < x.size(); ++j) {
      if (x[j] > 0.0) {
        m += 1.0;
        sum_a += anchor[j];
        sum_l += l[j];
        sum_ll += l[j] * l[j];
        sum_la += l[j] * anchor[j];
      }
    }
    if (m > 0.0) {
      const double denom = 1.0 + c * sum_ll - c * sum_l * sum_l / m;
      const double s_exact = (sum_la - sum_l * (sum_a - total) / m) / denom;
      const double mu = (sum_a - c * s_exact * sum_l - total) / m;
      Vector cand(x.size());
      bool valid = true;
      const double slack = 1e-9 * (1.0 + inf_norm(anchor) + total);
      for (Index j = 0; j < x.size(); ++j) {
        const double raw = anchor[j] - c * s_exact * l[j] - mu;
        if (x[j] > 0.0) {
          if (raw < -slack) valid = false;
          cand[j] = std::max(raw, 0.0);
        } else {
          if (raw > slack) valid = false;
          cand[j] = 0.0;
        }
      }
      if (valid) x = cand;
    }
    out.minimizer = std::move(x);
  }
  const double avg = l.dot(out.minimizer) / u.demand;
  out.subproblem_value = u.weight * u.demand * avg * avg +
                         0.5 * rho * (out.minimizer - anchor).squaredNorm();
  return out;
}

// Separable strictly convex quadratic over the simplex:
//   x_j(mu) = max(0, (num_j - mu) / den_j),  sum x(mu) = t.
Vector separable_simplex_solve(const Vector& num, const Vector& den,
                               double total, int* iterations) {
  double hi = num.maxCoeff();
  double lo = num.minCoeff() - total * den.maxCoeff();
  auto at = [&](double mu) {
    return ((num.array() - mu) / den.array()).max(0.0).matrix().eval();
  };
  int it = 0;
  for (; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (at(mid).sum() > total) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  Vector x = at(0.5 * (lo + hi));
  double inv_sum = 0.0, ratio_sum = 0.0;
  for (Index j = 0; j < x.size(); ++j) {
    if (x[j] > 0.0) {
      inv_sum += 1.0 / den[j];
      ratio_sum += num[j] / den[j];
    }
  }
  if (inv_sum > 0.0) {
    const double mu = (ratio_sum - total) / inv_sum;
    Vector cand = at(mu);
    bool same_support = true;
    for (Index j = 0; j < x.size(); ++j) {
      if ((x[j] > 0.0) != (cand[j] > 0.0) &&
          std::abs(num[j] - mu) > 1e-9 * (1.0 + std::abs(num[j]))) {
        same_support = false;
      }
    }
    if (same_support) x = cand;
  }
  if (iterations != nullptr) *iterations = it;
  return x;
}

// Scalar argmin of -s log(1+x) + rho/2 (x - a)^2 on (-1, inf): the larger root
// of x^2 + (1-a)x - (a + s/rho).
double log_prox_scalar(double scale, double a, double rho) {
  const double b = 1.0 - a;
  const double c = a + scale / rho;
  // (1-a)^2 + 4(a + s/rho) == (1+a)^2 + 4 s/rho
  const double disc = std::sqrt((1.0 + a) * (1.0 + a) + 4.0 * scale / rho);
  if (b >= 0.0) return 2.0 * c / (b + disc);
  return 0.5 * (-b + disc);
}

// Selector rows that are one-hot on distinct columns, mapping each selected
// column to the row that reads it. Returns false for general selectors.
bool one_hot_columns(const DenseMatrix& sel, std::vector<int>* owner) {
  owner->assign(static_cast<size_t>(sel.cols()), -1);
  for (Index p = 0; p < sel.rows(); ++p) {
    int col = -1;
    for (Index j = 0; j < sel.cols(); ++j) {
      const double v = sel(p, j);
      if (v == 0.0) continue;
      if (v != 1.0 || col >= 0) return false;
      col = static_cast<int>(j);
    }
    if (col < 0 || (*owner)[static_cast<size_t>(col)] >= 0) return false;
    (*owner)[static_cast<size_t>(col)] = static_cast<int>(p);
  }
  return true;
}

// Box bounds for sets that are coordinate boxes, including the capped orthant.
bool as_box(const FeasibleSet& set, Vector* lower, Vector* upper) {
  if (const auto* b = std::get_if<BoxSet>(&set.kind())) {
    *lower = b->lower;
    *upper = b->upper;
    return true;
  }
  if (const auto* p = std::get_if<CappedPathSet>(&set.kind());
      p != nullptr && p->topology.size() == 0) {
    *lower = Vector::Zero(p->cap.size());
    *upper = p->cap;
    return true;
  }
  return false;
}

}  // namespace

Vector project_scaled_simplex(const Vector& v, double total) {
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw ParameterError("simplex total must be > 0");
  }
  const Index n = v.size();
  if (n == 0) throw ShapeError("cannot project onto a 0-dimensional simplex");
  std::vector<double> sorted(v.data(), v.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Index k = 0; k < n; ++k) {
    cumulative += sorted[static_cast<size_t>(k)];
    const double t = (cumulative - total) / static_cast<double>(k + 1);
    if (sorted[static_cast<size_t>(k)] - t > 0.0) theta = t;
  }
  return (v.array() - theta).max(0.0).matrix();
}

Vector project_capped_path(const CappedPathSet& set, const Vector& v) {
  if (set.topology.size() == 0) return v.cwiseMax(0.0).cwiseMin(set.cap);
  return generic_user_prox(ConcaveUtility::zero(),
                           FeasibleSet::path_image(set.topology, set.cap), v,
                           1.0)
      .minimizer;
}

ProxResult prox_user(const ConcaveUtility& utility, const FeasibleSet& set,
                     const Vector& anchor, double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw ParameterError("prox_user: rho must be > 0");
  }
  if (!anchor.allFinite()) throw DomainError("prox_user: non-finite anchor");
  utility.check_dimension(anchor.size());
  set.check_dimension(anchor.size());

  const auto* simplex = std::get_if<ScaledSimplex>(&set.kind());
  Vector lower, upper;
  const bool is_box = as_box(set, &lower, &upper);

  return std::visit(
      Overloaded{
          [&](const ZeroUtility&) {
            ProxResult out;
            out.minimizer = set.project(anchor);
            out.subproblem_value =
                0.5 * rho * (out.minimizer - anchor).squaredNorm();
            return out;
          },
          [&](const QuadraticLatencyUtility& u) {
            if (simplex != nullptr) {
              return latency_simplex_prox(u, simplex->total, anchor, rho);
            }
            return generic_user_prox(utility, set, anchor, rho);
          },
          [&](const SeparableQuadraticUtility& u) {
            const Vector num = u.linear + rho * anchor;
            const Vector den = u.curvature.array() + rho;
            ProxResult out;
            if (is_box) {
              out.minimizer = num.cwiseQuotient(den).cwiseMax(lower).cwiseMin(upper);
            } else if (simplex != nullptr) {
              out.minimizer = separable_simplex_solve(num, den, simplex->total,
                                                      &out.iterations_used);
            } else {
              return generic_user_prox(utility, set, anchor, rho);
            }
            out.subproblem_value = -utility.value(out.minimizer) +
                                   0.5 * rho * (out.minimizer - anchor).squaredNorm();
            return out;
          },
          [&](const LogRateUtility& u) {
            std::vector<int> owner;
            if (is_box && one_hot_columns(u.selector, &owner)) {
              ProxResult out;
              out.minimizer.resize(anchor.size());
              for (Index j = 0; j < anchor.size(); ++j) {
                const double raw =
                    owner[static_cast<size_t>(j)] >= 0
                        ? log_prox_scalar(u.scale, anchor[j], rho)
                        : anchor[j];
                out.minimizer[j] = std::clamp(raw, lower[j], upper[j]);
              }
              out.subproblem_value =
                  -utility.value(out.minimizer) +
                  0.5 * rho * (out.minimizer - anchor).squaredNorm();
              return out;
            }
            return generic_user_prox(utility, set, anchor, rho);
          },
          [&](const CustomUtility&) {
            return generic_user_prox(utility, set, anchor, rho);
          },
      },
      utility.kind());
}

namespace {

double piecewise_prox(const PiecewiseLinearCost& c, double anchor, double w) {
  const size_t m = c.slopes.size();
  for (size_t k = 0; k < m; ++k) {
    const double lo = k == 0 ? -kInf : c.breakpoints[k - 1];
    const double hi = k + 1 == m ? kInf : c.breakpoints[k];
    const double cand = anchor - c.slopes[k] / w;
    if (cand >= lo && cand <= hi) return cand;
    if (k + 1 < m) {
      const double kink = c.breakpoints[k];
      if (anchor - c.slopes[k + 1] / w <= kink && kink <= cand) return kink;
    }
  }
  // Unreachable for strictly increasing slopes.
  return anchor;
}

double derivative_bisection(const ConvexCost& cost, double lower, double upper,
                            double anchor, double w, int* iterations) {
  auto h = [&](double y) { return cost.derivative(y) + w * (y - anchor); };
  if (h(lower) >= 0.0) return lower;
  if (cost.left_derivative(upper) + w * (upper - anchor) <= 0.0) return upper;
  double lo = lower, hi = upper;
  int it = 0;
  const double width = 1e-12 * std::max({1.0, std::abs(lower), std::abs(upper)});
  for (; it < 400 && hi - lo > width; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (h(mid) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  *iterations = it;
  return 0.5 * (lo + hi);
}

}  // namespace

ScalarProxResult prox_facility(const ConvexCost& cost, double lower,
                               double upper, double anchor, double weight) {
  if (!(weight > 0.0) || !std::isfinite(weight)) {
    throw ParameterError("prox_facility: weight must be > 0");
  }
  if (!(lower <= upper)) throw DomainError("prox_facility: empty interval");
  if (!std::isfinite(anchor)) throw DomainError("prox_facility: non-finite anchor");

  ScalarProxResult out;
  const double raw = std::visit(
      Overloaded{
          [&](const LinearCost& c) { return anchor - c.slope / weight; },
          [&](const EnergyCost& c) { return anchor - c.slope() / weight; },
          [&](const QuadraticCost& c) {
            return (weight * anchor - c.b) / (2.0 * c.a + weight);
          },
          [&](const PiecewiseLinearCost& c) {
            return piecewise_prox(c, anchor, weight);
          },
          [&](const CustomCost&) {
            return derivative_bisection(cost, lower, upper, anchor, weight,
                                        &out.iterations_used);
          },
      },
      cost.kind());
  out.minimizer = std::clamp(raw, lower, upper);
  const double gap = out.minimizer - anchor;
  out.subproblem_value = cost.value(out.minimizer) + 0.5 * weight * gap * gap;
  return out;
}

double user_stationarity_residual(const ConcaveUtility& utility,
                                  const FeasibleSet& set, const Vector& anchor,
                                  double rho, const Vector& x) {
  const Vector grad = -utility.gradient(x) + rho * (x - anchor);
  return inf_norm(x - set.project(x - grad));
}

Vector brute_force_minimize(
    const std::function<double(const Vector&)>& objective,
    const GridDomain& domain, double step) {
  if (!(step > 0.0)) throw ParameterError("grid step must be > 0");

  Vector best;
  double best_value = kInf;
  auto consider = [&](const Vector& p) {
    const double v = objective(p);
    if (v < best_value) {
      best_value = v;
      best = p;
    }
  };
  auto axis = [&](double lo, double hi) {
    std::vector<double> pts;
    const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long k = 0; k <= count; ++k) pts.push_back(lo + static_cast<double>(k) * step);
    if (pts.back() < hi) pts.push_back(hi);
    return pts;
  };

  std::visit(
      Overloaded{
          [&](const GridBox& box) {
            const Index d = box.lower.size();
            if (d < 1 || d > 3) {
              throw UnsupportedError("brute force supports dimension 1..3, got " +
                                     std::to_string(d));
            }
            std::vector<std::vector<double>> axes;
            for (Index k = 0; k < d; ++k) axes.push_back(axis(box.lower[k], box.upper[k]));
            Vector p(d);
            const std::vector<double> one{0.0};
            const auto& a1 = d > 1 ? axes[1] : one;
            const auto& a2 = d > 2 ? axes[2] : one;
            for (double v0 : axes[0]) {
              p[0] = v0;
              for (double v1 : a1) {
                if (d > 1) p[1] = v1;
                for (double v2 : a2) {
                  if (d > 2) p[2] = v2;
                  consider(p);
                }
              }
            }
          },
          [&](const GridSimplex& s) {
            if (s.dim < 1 || s.dim > 3) {
              throw UnsupportedError("brute force supports dimension 1..3, got " +
                                     std::to_string(s.dim));
            }
            Vector p(s.dim);
            if (s.dim == 1) {
              p[0] = s.total;
              consider(p);
              return;
            }
            const auto pts = axis(0.0, s.total);
            for (double v0 : pts) {
              if (s.dim == 2) {
                p[0] = v0;
                p[1] = s.total - v0;
                consider(p);
                continue;
              }
              for (double v1 : pts) {
                const double rest = s.total - v0 - v1;
                if (rest < -1e-12) break;
                p[0] = v0;
                p[1] = v1;
                p[2] = std::max(rest, 0.0);
                consider(p);
              }
            }
          },
      },
      domain);
  return best;
}

}  // namespace mfra
