#pragma once

// Adaptive Gauss–Kronrod quadrature and bracketed root refinement.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "warpcmc/errors.hpp"

namespace warpcmc {

namespace detail {

// Gauss–Kronrod 7/15 abscissae and weights on [-1, 1] (positive half).
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights pair with the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class Fn>
Panel gk15(Fn& fn, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = fn(centre);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    const double pair = fn(centre - dx) + fn(centre + dx);
    kronrod += kKronrodWeights[i] * pair;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * pair;
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace detail

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t panels = 0;
};

/// Globally adaptive G7/K15 on [a, b]: the panel with the largest error
/// estimate is bisected until the summed estimate is below
/// max(rel_tol * |I|, abs_tol).
///
/// Throws NumericError (carrying the achieved relative error) when the panel
/// budget is exhausted or the integrand is non-finite.
template <class Fn>
QuadResult integrate(Fn&& fn, double a, double b, double rel_tol = 1e-10,
                     double abs_tol = 0.0, std::size_t max_panels = 4000) {
  if (a == b) return {};
  std::priority_queue<detail::Panel> heap;
  auto first = detail::gk15(fn, a, b);
  double total = first.value;
  double err = first.error;
  heap.push(first);
  while (true) {
    if (!std::isfinite(total)) {
      throw NumericError("quadrature produced a non-finite value", err);
    }
    const double target = std::max(rel_tol * std::abs(total), abs_tol);
    // Once the estimate is at round-off level further splitting cannot help.
    const double floor = 50.0 * std::numeric_limits<double>::epsilon() * std::abs(total);
    if (err <= target || err <= floor) break;
    if (heap.size() >= max_panels) {
      throw NumericError("adaptive quadrature did not converge",
                         total != 0.0 ? err / std::abs(total) : err);
    }
    auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    auto left = detail::gk15(fn, worst.a, mid);
    auto right = detail::gk15(fn, mid, worst.b);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to shed the drift of incremental updates.
  double sum = 0.0, esum = 0.0;
  const std::size_t n = heap.size();
  while (!heap.empty()) {
    sum += heap.top().value;
    esum += heap.top().error;
    heap.pop();
  }
  return {sum, esum, n};
}

/// Single-panel K15 value. Used for cumulative sums over fine grids, where
/// adaptive subdivision noise would pollute finite differences.
template <class Fn>
double integrate_panel(Fn&& fn, double a, double b) {
  return detail::gk15(fn, a, b).value;
}

/// Refines a sign-changing bracket [lo, hi] of fn with TOMS 748 and returns
/// the final bracket.
template <class Fn>
std::pair<double, double> refine_root(Fn fn, double lo, double hi, double flo, double fhi,
                                      std::uintmax_t max_iter = 200) {
  if (flo == 0.0) return {lo, lo};
  if (fhi == 0.0) return {hi, hi};
  if ((flo > 0) == (fhi > 0)) {
    throw NumericError("root bracket does not change sign", std::abs(hi - lo));
  }
  boost::math::tools::eps_tolerance<double> tol(std::numeric_limits<double>::digits - 1);
  std::uintmax_t iters = max_iter;
  auto bracket = boost::math::tools::toms748_solve(fn, lo, hi, flo, fhi, tol, iters);
  if (iters >= max_iter) {
    throw NumericError("root refinement hit the iteration limit",
                       bracket.second - bracket.first);
  }
  return bracket;
}

template <class Fn>
double find_root(Fn fn, double lo, double hi) {
  auto br = refine_root(fn, lo, hi, fn(lo), fn(hi));
  return 0.5 * (br.first + br.second);
}

}  // namespace warpcmc
