#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "warpcmc/errors.hpp"
#include "warpcmc/numerics.hpp"

namespace warpcmc {

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kDefaultQuadTol = 1e-10;
inline constexpr double kDefaultRhoMax = 20.0;

/// f ≡ c.
struct ConstantWarp {
  double c = 0.0;
};

/// f(ρ) = ln(2 cosh ρ).
struct LogCoshWarp {};

/// f given by knots (ρ_i, f_i), ρ_0 = 0, interpolated by a monotone C¹
/// piecewise cubic (Fritsch–Carlson / PCHIP slopes).
struct TabulatedWarp {
  std::vector<std::pair<double, double>> knots;
};

/// Metric coefficients of g = dρ² + sinh²ρ dθ² + e^{2f} dt² at a point.
struct MetricCoeffs {
  double g_rr = 1.0;
  double g_thth = 0.0;
  double g_tt = 1.0;
};

namespace detail {

// Cubic Hermite data for TabulatedWarp plus the memoized F at each knot.
struct HermiteTable {
  std::vector<double> x, y, slope, cumulative_F;

  std::size_t segment(double r) const {
    auto it = std::upper_bound(x.begin(), x.end(), r);
    std::size_t k = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
    return std::min(k, x.size() - 2);
  }

  double value(double r) const {
    const auto k = segment(r);
    const double h = x[k + 1] - x[k];
    const double s = (r - x[k]) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    const double h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s);
    const double h11 = s * s * (s - 1);
    return h00 * y[k] + h10 * h * slope[k] + h01 * y[k + 1] + h11 * h * slope[k + 1];
  }

  double derivative(double r) const {
    const auto k = segment(r);
    const double h = x[k + 1] - x[k];
    const double s = (r - x[k]) / h;
    const double d00 = 6 * s * s - 6 * s;
    const double d10 = 3 * s * s - 4 * s + 1;
    const double d01 = -d00;
    const double d11 = 3 * s * s - 2 * s;
    return (d00 * y[k] + d01 * y[k + 1]) / h + d10 * slope[k] + d11 * slope[k + 1];
  }
};

// Shape-preserving end slope (three-point formula, clipped).
inline double pchip_end_slope(double h0, double h1, double m0, double m1) {
  double d = ((2 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
  if ((d > 0) != (m0 > 0) || d == 0.0) return 0.0;
  if ((m0 > 0) != (m1 > 0) && std::abs(d) > std::abs(3 * m0)) return 3 * m0;
  return d;
}

inline std::shared_ptr<const HermiteTable> build_table(const TabulatedWarp& tab,
                                                       double quad_tol) {
  const auto& kn = tab.knots;
  if (kn.size() < 2) throw InputError("tabulated warping needs at least two knots");
  if (kn.front().first != 0.0) throw InputError("tabulated warping must start at rho = 0");
  auto t = std::make_shared<HermiteTable>();
  for (const auto& [r, v] : kn) {
    if (!std::isfinite(r) || !std::isfinite(v)) throw InputError("non-finite knot");
    if (!t->x.empty() && r <= t->x.back()) {
      throw InputError("tabulated knots must be strictly increasing in rho");
    }
    t->x.push_back(r);
    t->y.push_back(v);
  }
  const std::size_t n = t->x.size();
  std::vector<double> h(n - 1), m(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    h[k] = t->x[k + 1] - t->x[k];
    m[k] = (t->y[k + 1] - t->y[k]) / h[k];
  }
  t->slope.assign(n, 0.0);
  if (n == 2) {
    t->slope[0] = t->slope[1] = m[0];
  } else {
    for (std::size_t k = 1; k + 1 < n; ++k) {
      if (m[k - 1] == 0.0 || m[k] == 0.0 || (m[k - 1] > 0) != (m[k] > 0)) continue;
      const double w1 = 2 * h[k] + h[k - 1];
      const double w2 = h[k] + 2 * h[k - 1];
      t->slope[k] = (w1 + w2) / (w1 / m[k - 1] + w2 / m[k]);
    }
    t->slope[0] = pchip_end_slope(h[0], h[1], m[0], m[1]);
    t->slope[n - 1] = pchip_end_slope(h[n - 2], h[n - 3], m[n - 2], m[n - 3]);
  }
  t->cumulative_F.assign(n, 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    auto integrand = [&](double r) { return std::exp(t->value(r)) * std::sinh(r); };
    t->cumulative_F[k + 1] =
        t->cumulative_F[k] + integrate(integrand, t->x[k], t->x[k + 1], quad_tol).value;
  }
  return t;
}

}  // namespace detail

/// A radial warping function f(ρ) together with f' and the cumulative
/// integral F(ρ) = ∫₀^ρ e^{f(s)} sinh s ds (normalized so F(0) = 0).
///
/// Immutable after construction; copies share the tabulated data.
class WarpField {
 public:
  using Family = std::variant<ConstantWarp, LogCoshWarp, TabulatedWarp>;

  explicit WarpField(Family family, double quad_tol = kDefaultQuadTol)
      : family_(std::move(family)), quad_tol_(quad_tol) {
    if (auto* tab = std::get_if<TabulatedWarp>(&family_)) {
      table_ = detail::build_table(*tab, quad_tol_);
    }
  }

  static WarpField constant(double c) { return WarpField(ConstantWarp{c}); }
  static WarpField log_cosh() { return WarpField(LogCoshWarp{}); }
  static WarpField tabulated(std::vector<std::pair<double, double>> knots,
                             double quad_tol = kDefaultQuadTol) {
    return WarpField(TabulatedWarp{std::move(knots)}, quad_tol);
  }

  const Family& family() const { return family_; }
  double quad_tol() const { return quad_tol_; }

  std::string name() const {
    if (std::holds_alternative<ConstantWarp>(family_)) return "constant";
    if (std::holds_alternative<LogCoshWarp>(family_)) return "log_cosh";
    return "table";
  }

  /// Largest ρ at which f is defined.
  double max_radius() const {
    return table_ ? table_->x.back() : std::numeric_limits<double>::infinity();
  }

  double f(double rho) const {
    check_domain(rho);
    if (auto* k = std::get_if<ConstantWarp>(&family_)) return k->c;
    // ln(2 cosh ρ) = ρ + ln(1 + e^{-2ρ}) avoids overflow of cosh.
    if (std::holds_alternative<LogCoshWarp>(family_)) return rho + std::log1p(std::exp(-2 * rho));
    return table_->value(rho);
  }

  double df(double rho) const {
    check_domain(rho);
    if (std::holds_alternative<ConstantWarp>(family_)) return 0.0;
    if (std::holds_alternative<LogCoshWarp>(family_)) return std::tanh(rho);
    return table_->derivative(rho);
  }

  double exp_f(double rho) const {
    if (std::holds_alternative<LogCoshWarp>(family_)) {
      check_domain(rho);
      return 2 * std::cosh(rho);
    }
    return std::exp(f(rho));
  }

  /// F(ρ) = ∫₀^ρ e^f sinh. Closed forms for the analytic families.
  double F(double rho) const {
    check_domain(rho);
    if (auto* k = std::get_if<ConstantWarp>(&family_)) {
      const double s = std::sinh(0.5 * rho);
      return std::exp(k->c) * 2 * s * s;  // e^c (cosh ρ - 1)
    }
    if (std::holds_alternative<LogCoshWarp>(family_)) {
      const double s = std::sinh(rho);
      return s * s;  // (cosh 2ρ - 1) / 2
    }
    const auto k = table_->segment(rho);
    const double x0 = table_->x[k];
    if (rho == x0) return table_->cumulative_F[k];
    auto integrand = [this](double r) { return std::exp(table_->value(r)) * std::sinh(r); };
    return table_->cumulative_F[k] + integrate(integrand, x0, rho, quad_tol_).value;
  }

  /// √det g = e^f sinh ρ, which is also F'(ρ).
  double volume_element(double rho) const { return exp_f(rho) * std::sinh(rho); }

  MetricCoeffs metric(double rho) const {
    const double s = std::sinh(rho);
    const double ef = exp_f(rho);
    return {1.0, s * s, ef * ef};
  }

  /// Supremum of e^{-2f} over [0, ρ₀].
  double sup_exp_minus_2f(double rho0) const { return sup_over(rho0, -2.0); }

  /// Supremum of e^{f} over [0, ρ₀].
  double sup_exp_f(double rho0) const { return sup_over(rho0, 1.0); }

 private:
  void check_domain(double rho) const {
    if (!(rho >= 0.0)) throw DomainError("warping evaluated at negative rho");
    if (table_ && rho > table_->x.back()) {
      throw DomainError("rho beyond the tabulated warping range");
    }
  }

  // sup over [0, ρ₀] of exp(scale * f).
  double sup_over(double rho0, double scale) const {
    if (!(rho0 > 0.0)) throw DomainError("supremum radius must be positive");
    check_domain(rho0);
    if (auto* k = std::get_if<ConstantWarp>(&family_)) return std::exp(scale * k->c);
    if (std::holds_alternative<LogCoshWarp>(family_)) {
      // f is increasing: the sup sits at ρ₀ for positive scale, at 0 otherwise.
      return std::exp(scale * f(scale > 0 ? rho0 : 0.0));
    }
    // Dense sampling, then ternary refinement around the best sample.
    // Approximate: a maximum narrower than the sample spacing can be missed.
    constexpr int kSamples = 1024;
    auto g = [&](double r) { return scale * f(r); };
    int best = 0;
    double best_val = g(0.0);
    for (int i = 1; i <= kSamples; ++i) {
      const double v = g(rho0 * i / kSamples);
      if (v > best_val) best_val = v, best = i;
    }
    double lo = rho0 * std::max(best - 1, 0) / kSamples;
    double hi = rho0 * std::min(best + 1, kSamples) / kSamples;
    for (int it = 0; it < 100 && hi - lo > 1e-14 * std::max(1.0, rho0); ++it) {
      const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
      if (g(m1) < g(m2)) lo = m1; else hi = m2;
    }
    best_val = std::max({best_val, g(lo), g(hi), g(0.5 * (lo + hi))});
    return std::exp(best_val);
  }

  Family family_;
  double quad_tol_;
  std::shared_ptr<const detail::HermiteTable> table_;
};

/// 𝓕 = sup_B e^{-2f} · sup_B e^{f}, with B the closed geodesic disc of radius ρ₀.
inline double script_F_bound(const WarpField& w, double rho0) {
  return w.sup_exp_minus_2f(rho0) * w.sup_exp_f(rho0);
}

// ---------------------------------------------------------------------------
// Divergence split on H ×_f R.

/// Uniform-in-θ polar grid (ρ, θ, t). θ is periodic on [0, 2π).
struct PolarGrid3 {
  std::vector<double> rho;
  std::size_t n_theta = 0;
  std::vector<double> t;

  double dtheta() const { return 2 * kPi / static_cast<double>(n_theta); }
  double theta(std::size_t j) const { return dtheta() * static_cast<double>(j); }
  std::size_t size() const { return rho.size() * n_theta * t.size(); }
  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
    return (i * n_theta + j) * t.size() + k;
  }
};

/// Vector field X = Xρ ∂ρ + Xθ ∂θ + Xt ξ sampled on a PolarGrid3.
struct PolarVectorField3 {
  std::vector<double> x_rho, x_theta, x_t;
};

template <class Fn>
PolarVectorField3 sample_field(const PolarGrid3& grid, Fn&& fn) {
  PolarVectorField3 out;
  out.x_rho.resize(grid.size());
  out.x_theta.resize(grid.size());
  out.x_t.resize(grid.size());
  for (std::size_t i = 0; i < grid.rho.size(); ++i)
    for (std::size_t j = 0; j < grid.n_theta; ++j)
      for (std::size_t k = 0; k < grid.t.size(); ++k) {
        const auto [a, b, c] = fn(grid.rho[i], grid.theta(j), grid.t[k]);
        const auto n = grid.index(i, j, k);
        out.x_rho[n] = a;
        out.x_theta[n] = b;
        out.x_t[n] = c;
      }
  return out;
}

struct DivergenceResidual {
  /// |LHS - RHS| per grid point; NaN on the ρ and t boundary layers.
  std::vector<double> residual;
  double max_residual = 0.0;
};

namespace detail {
// Second-order central derivative on a possibly non-uniform stencil.
inline double central_diff(double fm, double f0, double fp, double hm, double hp) {
  return (hm * hm * fp - hp * hp * fm + (hp * hp - hm * hm) * f0) / (hm * hp * (hm + hp));
}
}  // namespace detail

/// Pointwise residual of e^f div_f X = div_H(e^f dπ₁X) + ξ(e^{-f} g(X, ξ)).
///
/// The left side is the expanded 3D divergence (∂ᵢXⁱ + Xρ ∂ρ ln√det g, with
/// √det g = e^f sinh ρ and analytic ∂ρ ln√det g = f' + coth ρ), the right side
/// the conservative 2D divergence plus the fiber term; both by central
/// differences, so the residual is O(h²) and vanishes only if the identity holds.
inline DivergenceResidual divergence_identity_residual(const WarpField& w,
                                                       const PolarGrid3& grid,
                                                       const PolarVectorField3& x) {
  const std::size_t nr = grid.rho.size(), nth = grid.n_theta, nt = grid.t.size();
  if (nr < 3 || nth < 3 || nt < 3) throw InputError("divergence grid needs >= 3 points per axis");
  if (x.x_rho.size() != grid.size() || x.x_theta.size() != grid.size() ||
      x.x_t.size() != grid.size()) {
    throw InputError("vector field does not match the grid");
  }
  for (std::size_t i = 0; i < nr; ++i) {
    if (!(grid.rho[i] > 0.0)) throw InputError("grid must exclude rho = 0");
    if (i > 0 && grid.rho[i] <= grid.rho[i - 1]) throw InputError("rho grid must increase");
  }
  for (std::size_t k = 1; k < nt; ++k)
    if (grid.t[k] <= grid.t[k - 1]) throw InputError("t grid must increase");

  const double dth = grid.dtheta();
  std::vector<double> ef(nr), sh(nr), dlog(nr);
  for (std::size_t i = 0; i < nr; ++i) {
    ef[i] = w.exp_f(grid.rho[i]);
    sh[i] = std::sinh(grid.rho[i]);
    dlog[i] = w.df(grid.rho[i]) + 1.0 / std::tanh(grid.rho[i]);
  }

  DivergenceResidual out;
  out.residual.assign(grid.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 1; i + 1 < nr; ++i) {
    const double hm = grid.rho[i] - grid.rho[i - 1];
    const double hp = grid.rho[i + 1] - grid.rho[i];
    for (std::size_t j = 0; j < nth; ++j) {
      const std::size_t jm = (j + nth - 1) % nth, jp = (j + 1) % nth;
      for (std::size_t k = 1; k + 1 < nt; ++k) {
        const double tm = grid.t[k] - grid.t[k - 1];
        const double tp = grid.t[k + 1] - grid.t[k];
        const auto at = [&](const std::vector<double>& v, std::size_t a, std::size_t b,
                            std::size_t c) { return v[grid.index(a, b, c)]; };
        const std::size_t n = grid.index(i, j, k);

        const double dxr = detail::central_diff(at(x.x_rho, i - 1, j, k), x.x_rho[n],
                                                at(x.x_rho, i + 1, j, k), hm, hp);
        const double dxth = (at(x.x_theta, i, jp, k) - at(x.x_theta, i, jm, k)) / (2 * dth);
        const double dxt = detail::central_diff(at(x.x_t, i, j, k - 1), x.x_t[n],
                                                at(x.x_t, i, j, k + 1), tm, tp);
        const double lhs = ef[i] * (dxr + dlog[i] * x.x_rho[n] + dxth + dxt);

        const double flux_m = sh[i - 1] * ef[i - 1] * at(x.x_rho, i - 1, j, k);
        const double flux_0 = sh[i] * ef[i] * x.x_rho[n];
        const double flux_p = sh[i + 1] * ef[i + 1] * at(x.x_rho, i + 1, j, k);
        const double div_h =
            (detail::central_diff(flux_m, flux_0, flux_p, hm, hp) +
             sh[i] * ef[i] * (at(x.x_theta, i, jp, k) - at(x.x_theta, i, jm, k)) / (2 * dth)) /
            sh[i];
        // g(X, ξ) = e^{2f} Xt, so e^{-f} g(X, ξ) = e^f Xt.
        const double fiber = detail::central_diff(ef[i] * at(x.x_t, i, j, k - 1), ef[i] * x.x_t[n],
                                                  ef[i] * at(x.x_t, i, j, k + 1), tm, tp);
        const double r = std::abs(lhs - (div_h + fiber));
        out.residual[n] = r;
        out.max_residual = std::max(out.max_residual, r);
      }
    }
  }
  return out;
}

}  // namespace warpcmc
