#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "warpcmc/errors.hpp"
#include "warpcmc/numerics.hpp"
#include "warpcmc/profile.hpp"
#include "warpcmc/warp_field.hpp"

namespace warpcmc {

/// Scalar field on a polar grid: strictly increasing ρ (axis excluded) times a
/// uniform periodic θ partition of [0, 2π). Row-major in ρ.
struct GridField {
  std::vector<double> rho;
  std::size_t n_theta = 0;
  std::vector<double> values;

  double dtheta() const { return 2 * kPi / static_cast<double>(n_theta); }
  double theta(std::size_t j) const { return dtheta() * static_cast<double>(j); }
  double& at(std::size_t i, std::size_t j) { return values[i * n_theta + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * n_theta + j]; }

  static GridField zeros(std::vector<double> rho, std::size_t n_theta) {
    GridField g{std::move(rho), n_theta, {}};
    g.values.assign(g.rho.size() * n_theta, 0.0);
    return g;
  }
};

namespace detail {

inline void validate_grid(const GridField& u) {
  if (u.rho.size() < 5) throw InputError("mean curvature needs at least 5 rho samples");
  if (u.n_theta < 8) throw InputError("mean curvature needs at least 8 theta samples");
  if (u.values.size() != u.rho.size() * u.n_theta) throw InputError("grid is not rectangular");
  for (std::size_t i = 0; i < u.rho.size(); ++i) {
    if (!(u.rho[i] > 0.0) || std::sinh(u.rho[i]) < 1e-8) {
      throw InputError("grid touches the axis (sinh rho ~ 0)");
    }
    if (i > 0 && !(u.rho[i] > u.rho[i - 1])) throw InputError("rho grid must increase");
  }
}

// Derivative at x0 of the quadratic through (x1,y1), (x2,y2), (x3,y3).
inline double quadratic_slope_at(double x0, double x1, double y1, double x2, double y2,
                                 double x3, double y3) {
  const double l1 = ((x0 - x2) + (x0 - x3)) / ((x1 - x2) * (x1 - x3));
  const double l2 = ((x0 - x1) + (x0 - x3)) / ((x2 - x1) * (x2 - x3));
  const double l3 = ((x0 - x1) + (x0 - x2)) / ((x3 - x1) * (x3 - x2));
  return l1 * y1 + l2 * y2 + l3 * y3;
}

// ∂ρ u at node (i, j): central inside, second-order one-sided at the ends.
inline double node_drho(const GridField& u, std::size_t i, std::size_t j) {
  const auto& r = u.rho;
  const std::size_t n = r.size();
  if (i == 0) return quadratic_slope_at(r[0], r[0], u.at(0, j), r[1], u.at(1, j), r[2], u.at(2, j));
  if (i == n - 1) {
    return quadratic_slope_at(r[n - 1], r[n - 3], u.at(n - 3, j), r[n - 2], u.at(n - 2, j),
                              r[n - 1], u.at(n - 1, j));
  }
  return central_diff(u.at(i - 1, j), u.at(i, j), u.at(i + 1, j), r[i] - r[i - 1],
                      r[i + 1] - r[i]);
}

// Derivative at xm of the cubic through four points (Lagrange form); on a
// uniform grid with xm the middle face this is (u₀ − 27u₁ + 27u₂ − u₃)/24h.
inline double face_slope4(double x0, double x1, double x2, double x3, double y0, double y1,
                          double y2, double y3, double xm) {
  const double x[4] = {x0, x1, x2, x3}, y[4] = {y0, y1, y2, y3};
  double d = 0.0;
  for (int a = 0; a < 4; ++a) {
    double denom = 1.0;
    for (int b = 0; b < 4; ++b)
      if (b != a) denom *= x[a] - x[b];
    // d/dx of Π_{b≠a}(x − x_b) at xm.
    double num = 0.0;
    for (int c = 0; c < 4; ++c) {
      if (c == a) continue;
      double prod = 1.0;
      for (int b = 0; b < 4; ++b)
        if (b != a && b != c) prod *= xm - x[b];
      num += prod;
    }
    // Differences against y₁ keep constants exact (the weights sum to 0 only up to roundoff).
    d += (y[a] - y[1]) * num / denom;
  }
  return d;
}

}  // namespace detail

namespace detail {

// Core of the mean-curvature operator. The samplers return f at node (i, j),
// at the radial face (i + 1/2, j) and at the angular face (i, j + 1/2).
template <class NodeF, class RadialFaceF, class AngularFaceF>
GridField mean_curvature_impl(const GridField& u, NodeF node_f, RadialFaceF rface_f,
                              AngularFaceF tface_f) {
  validate_grid(u);
  const std::size_t nr = u.rho.size(), nth = u.n_theta;
  const double dth = u.dtheta();
  const auto& r = u.rho;

  // Radial face fluxes sinh ρ · e^f u_ρ / W at (i + 1/2, j).
  std::vector<double> face_r((nr - 1) * nth), face_rho(nr - 1);
  for (std::size_t i = 0; i + 1 < nr; ++i) {
    const double rm = 0.5 * (r[i] + r[i + 1]);
    const double h = r[i + 1] - r[i];
    const double sh = std::sinh(rm);
    face_rho[i] = rm;
    for (std::size_t j = 0; j < nth; ++j) {
      const std::size_t jm = (j + nth - 1) % nth, jp = (j + 1) % nth;
      const double ut =
          (u.at(i, jp) - u.at(i, jm) + u.at(i + 1, jp) - u.at(i + 1, jm)) / (4 * dth);
      double ur = (u.at(i + 1, j) - u.at(i, j)) / h;
      if (i >= 1 && i + 2 < nr) {
        // Four-point staggered difference where the neighbours exist.
        ur = face_slope4(r[i - 1], r[i], r[i + 1], r[i + 2], u.at(i - 1, j), u.at(i, j),
                         u.at(i + 1, j), u.at(i + 2, j), rm);
      }
      const double f = rface_f(i, j);
      const double W = std::sqrt(std::exp(-2 * f) + ur * ur + ut * ut / (sh * sh));
      face_r[i * nth + j] = sh * std::exp(f) * ur / W;
    }
  }
  // Angular face fluxes e^f u_θ / W at (i, j + 1/2).
  std::vector<double> face_t(nr * nth);
  for (std::size_t i = 0; i < nr; ++i) {
    const double sh = std::sinh(r[i]);
    for (std::size_t j = 0; j < nth; ++j) {
      const std::size_t jp = (j + 1) % nth;
      const double ut = (u.at(i, jp) - u.at(i, j)) / dth;
      const double ur = 0.5 * (node_drho(u, i, j) + node_drho(u, i, jp));
      const double f = tface_f(i, j);
      const double W = std::sqrt(std::exp(-2 * f) + ur * ur + ut * ut / (sh * sh));
      face_t[i * nth + j] = std::exp(f) * ut / W;
    }
  }

  GridField H = GridField::zeros(u.rho, nth);
  for (std::size_t i = 0; i < nr; ++i) {
    const double sh = std::sinh(r[i]);
    for (std::size_t j = 0; j < nth; ++j) {
      const std::size_t jm = (j + nth - 1) % nth;
      double dr;
      if (i == 0) {
        dr = quadratic_slope_at(r[0], face_rho[0], face_r[j], face_rho[1], face_r[nth + j],
                                face_rho[2], face_r[2 * nth + j]);
      } else if (i == nr - 1) {
        const std::size_t k = nr - 2;
        dr = quadratic_slope_at(r[i], face_rho[k - 2], face_r[(k - 2) * nth + j],
                                face_rho[k - 1], face_r[(k - 1) * nth + j], face_rho[k],
                                face_r[k * nth + j]);
      } else {
        dr = (face_r[i * nth + j] - face_r[(i - 1) * nth + j]) / (face_rho[i] - face_rho[i - 1]);
      }
      const double dt = (face_t[i * nth + j] - face_t[i * nth + jm]) / dth;
      const double div = dr / sh + dt / (sh * sh);
      H.at(i, j) = -div / (2 * std::exp(node_f(i, j)));
    }
  }
  return H;
}

}  // namespace detail

/// Mean curvature of the graph t = u(ρ, θ) in H ×_f R with downward normal,
/// from the polar divergence form
///
///   −2H e^f = (1/sinh ρ) ∂ρ[e^f u_ρ sinh ρ / W] + (1/sinh²ρ) ∂θ[e^f u_θ / W],
///   W² = e^{−2f} + u_ρ² + u_θ²/sinh²ρ.
///
/// Fluxes live on cell faces (half points) and are differenced centrally, so
/// the scheme is conservative and second order; the first and last ρ rows use
/// one-sided quadratic differences of the face fluxes. The radial face slope
/// u_ρ uses the four-point staggered difference away from the ends: for
/// rotational graphs the radial flux equals the smooth first integral, and
/// the remaining error sits almost entirely in that slope, whose higher
/// derivatives blow up towards the equator.
/// `log_warp(ρ, θ)` returns f at arbitrary points.
inline GridField mean_curvature_graph(const GridField& u,
                                      const std::function<double(double, double)>& log_warp) {
  const auto& r = u.rho;
  const double dth = u.dtheta();
  return detail::mean_curvature_impl(
      u, [&](std::size_t i, std::size_t j) { return log_warp(r[i], u.theta(j)); },
      [&](std::size_t i, std::size_t j) { return log_warp(0.5 * (r[i] + r[i + 1]), u.theta(j)); },
      [&](std::size_t i, std::size_t j) { return log_warp(r[i], u.theta(j) + 0.5 * dth); });
}

inline GridField mean_curvature_graph(const GridField& u, const WarpField& w) {
  return mean_curvature_graph(u, [&w](double rho, double) { return w.f(rho); });
}

/// Variant for a warping sampled on the same grid as u (possibly θ-dependent);
/// face values are averages of the two neighbouring nodes.
inline GridField mean_curvature_graph(const GridField& u, const GridField& f) {
  if (f.rho != u.rho || f.n_theta != u.n_theta || f.values.size() != u.values.size()) {
    throw InputError("warping grid does not match the height grid");
  }
  const std::size_t nth = f.n_theta;
  return detail::mean_curvature_impl(
      u, [&](std::size_t i, std::size_t j) { return f.at(i, j); },
      [&](std::size_t i, std::size_t j) { return 0.5 * (f.at(i, j) + f.at(i + 1, j)); },
      [&](std::size_t i, std::size_t j) { return 0.5 * (f.at(i, j) + f.at(i, (j + 1) % nth)); });
}

/// The rotational graph of a profile on a uniform ρ grid that hits lo and hi
/// exactly with spacing at most `spacing`, extended by `pad` extra nodes on
/// each side. With `anchored` the graph is translated so that u = 0 at the
/// first node: vertical translations are isometries, and small values near the
/// axis keep rounding noise out of the second differences there.
inline GridField rotational_graph(const ProfileCurve& p, double lo, double hi, double spacing,
                                  std::size_t n_theta, std::size_t pad = 0,
                                  bool anchored = false) {
  if (!(lo > 0.0 && lo < hi && hi < p.rho0()) || !(spacing > 0.0)) {
    throw InputError("rotational graph needs 0 < lo < hi < rho0 and spacing > 0");
  }
  const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / spacing - 1e-9));
  const double step = (hi - lo) / static_cast<double>(n);
  const double ipad = static_cast<double>(pad);
  if (!(lo - ipad * step > 0.0 && hi + ipad * step < p.rho0())) {
    throw InputError("padded rotational graph leaves (0, rho0)");
  }
  std::vector<double> rho(n + 1 + 2 * pad);
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const double k = static_cast<double>(i) - ipad;
    rho[i] = i == n + pad ? hi : lo + (hi - lo) * k / static_cast<double>(n);
  }
  const auto u = p.u_on(rho, anchored);
  GridField g = GridField::zeros(rho, n_theta);
  for (std::size_t i = 0; i < rho.size(); ++i)
    for (std::size_t j = 0; j < n_theta; ++j) g.at(i, j) = u[i];
  return g;
}

/// max |H_fd − H| of the discrete operator on the rotational graph of p over
/// [0.05 ρ₀, 0.95 ρ₀]. Two guard nodes on each side keep the measured rows on
/// the centred stencil.
inline double mc_consistency_error(const ProfileCurve& p, double spacing,
                                   std::size_t n_theta = 8) {
  constexpr std::size_t kPad = 2;
  const double r0 = p.rho0();
  const auto u = rotational_graph(p, 0.05 * r0, 0.95 * r0, spacing, n_theta, kPad, true);
  const auto hf = mean_curvature_graph(u, p.warp());
  double err = 0.0;
  for (std::size_t i = kPad; i + kPad < hf.rho.size(); ++i)
    for (std::size_t j = 0; j < n_theta; ++j) err = std::max(err, std::abs(hf.at(i, j) - p.H()));
  return err;
}

// ---------------------------------------------------------------------------
// Rotational spheres.

struct RotationalSphere {
  ProfileCurve profile;
  double H = 0.0;
  double d = 0.0;
  double rho0 = 0.0;
  double h = 0.0;
  double A_plus = 0.0;
  double vol_U1 = 0.0;

  double total_height() const { return 2 * h; }
  double total_area() const { return 2 * A_plus; }
  double total_volume() const { return 2 * vol_U1; }
};

namespace detail {
// Area density e^f sinh²ρ / √P = sinh ρ √(1 + e^{2f} u_ρ²) of the cap.
inline double area_density(const SlopeEvaluator& s, double rho) {
  const auto& w = s.warp();
  const double sh = std::sinh(rho);
  return w.exp_f(rho) * sh * sh / std::sqrt(s.gap(rho));
}

// 2π ∫ over ρ ∈ [ρ_lo, ρ_hi] of the area density, in the σ variable.
inline double cap_area_between(const ProfileCurve& p, double rho_lo, double rho_hi,
                               double rel_tol) {
  const auto& s = p.slope_evaluator();
  const double r0 = p.rho0();
  auto g = [&](double sigma) {
    const double rho = r0 - sigma * sigma;
    if (sigma <= 0.0 || rho <= 0.0) return 0.0;
    return 2 * sigma * area_density(s, rho);
  };
  const double s_hi = std::sqrt(std::max(r0 - rho_lo, 0.0));
  const double s_lo = std::sqrt(std::max(r0 - rho_hi, 0.0));
  return 2 * kPi * integrate(g, s_lo, s_hi, rel_tol, 1e-300).value;
}
}  // namespace detail

/// A⁺ = 2π ∫₀^{ρ₀} e^f sinh²ρ / √(e^{2f} sinh²ρ − G²) dρ.
inline double cap_area(const ProfileCurve& p, double rel_tol = kDefaultQuadTol) {
  return detail::cap_area_between(p, 0.0, p.rho0(), rel_tol * 1e-2);
}

/// Vol(U₁) = 2π ∫₀^{ρ₀} u e^f sinh ρ dρ, integrated by parts to
/// 2π ∫₀^{ρ₀} F(ρ) |u_ρ| dρ (u(ρ₀) = 0 and F(0) = 0 kill the boundary terms).
inline double cap_volume(const ProfileCurve& p, double rel_tol = kDefaultQuadTol) {
  const auto& s = p.slope_evaluator();
  const auto& w = p.warp();
  const double r0 = p.rho0();
  auto g = [&](double sigma) {
    const double rho = r0 - sigma * sigma;
    if (sigma <= 0.0 || rho <= 0.0) return 0.0;
    return w.F(rho) * s.sigma_integrand(sigma);
  };
  return 2 * kPi * p.u_scale() * integrate(g, 0.0, std::sqrt(r0), rel_tol * 1e-2, 1e-300).value;
}

/// Glues u and −u over the disc of radius ρ₀ and caches the cap summary.
inline RotationalSphere glue_bigraph(const ProfileCurve& p) {
  RotationalSphere s{p, p.H(), p.d(), p.rho0(), p.height(), 0.0, 0.0};
  s.A_plus = cap_area(p);
  s.vol_U1 = cap_volume(p);
  return s;
}

inline RotationalSphere build_sphere(const WarpField& w, double H, double d = 0.0,
                                     std::size_t n = 401, const SolverOptions& opt = {}) {
  return glue_bigraph(integrate_profile(w, H, d, n, opt));
}

struct LevelCircle {
  double t = 0.0;
  double rho_t = 0.0;
  /// Length 2π sinh ρ_t of Γ_t (the slice is isometric to the base).
  double L_t = 0.0;
  /// Area A(t) of the part of the cap above height t.
  double area_cap_above = 0.0;
  /// Hyperbolic disc area 2π(cosh ρ_t − 1).
  double disc_area = 0.0;
};

/// Radius ρ_t with u(ρ_t) = t, for 0 ≤ t < h.
inline double level_radius(const RotationalSphere& s, double t) {
  const auto& p = s.profile;
  if (!(t >= 0.0) || !(t < p.height())) throw DomainError("level must satisfy 0 <= t < h");
  if (t == 0.0) return p.rho0();
  const auto& sm = p.samples();
  // Samples run from the axis (largest u) to ρ₀ (u = 0); find u_k ≥ t > u_{k+1}.
  std::size_t k = 0;
  while (k + 1 < sm.size() && sm[k + 1].u >= t) ++k;
  auto fn = [&](double rho) { return p.u(rho) - t; };
  const double lo = sm[k].rho, hi = sm[k + 1].rho;
  const double flo = sm[k].u - t, fhi = sm[k + 1].u - t;
  if (flo == 0.0) return lo;
  auto br = refine_root(fn, lo, hi, flo, fhi);
  return 0.5 * (br.first + br.second);
}

inline LevelCircle level_circle(const RotationalSphere& s, double t) {
  LevelCircle c;
  c.t = t;
  c.rho_t = level_radius(s, t);
  c.L_t = 2 * kPi * std::sinh(c.rho_t);
  c.area_cap_above = detail::cap_area_between(s.profile, 0.0, c.rho_t, 1e-13);
  const double sh = std::sinh(0.5 * c.rho_t);
  c.disc_area = 4 * kPi * sh * sh;  // 2π(cosh ρ − 1)
  return c;
}

/// Components of ξ = T + νN on the upper graph at radius ρ: (‖T‖, ν).
inline std::pair<double, double> tangential_decomposition(const RotationalSphere& s,
                                                          double rho) {
  if (!(rho > 0.0 && rho < s.rho0)) throw DomainError("need 0 < rho < rho0");
  const double ef = s.profile.warp().exp_f(rho);
  const double q = ef * s.profile.slope(rho);  // e^f u_ρ
  const double root = std::sqrt(1 + q * q);
  return {ef * std::abs(q) / root, -ef / root};
}

struct FluxResidual {
  /// |e^{2f} u_ρ sinh ρ / √(1 + (e^f u_ρ)²) − (d − 2H F)|.
  double corrected = 0.0;
  /// Same with the literal d − 2H e^f F.
  double as_printed = 0.0;
};

inline FluxResidual flux_first_integral_residual(const RotationalSphere& s, double rho) {
  if (!(rho > 0.0 && rho < s.rho0)) throw DomainError("need 0 < rho < rho0");
  const auto& w = s.profile.warp();
  const double ef = w.exp_f(rho);
  const double ur = s.profile.slope(rho);
  const double q = ef * ur;
  const double flux = ef * ef * ur * std::sinh(rho) / std::sqrt(1 + q * q);
  const double F = w.F(rho);
  return {std::abs(flux - (s.d - 2 * s.H * F)), std::abs(flux - (s.d - 2 * s.H * ef * F))};
}

struct CoareaCheck {
  double t = 0.0;
  double dt = 0.0;
  /// Central difference (A(t + Δt) − A(t − Δt)) / 2Δt.
  double dA_dt = 0.0;
  /// −∫_{Γ_t} ‖grad h‖⁻¹ = −L_t √(1 + e^{2f} u_ρ²) / |u_ρ| at ρ_t.
  double boundary_integral = 0.0;
  double residual = 0.0;
};

/// A'(t) by central differences against the coarea boundary integral.
/// The difference A(t − Δt) − A(t + Δt) is integrated directly over
/// [ρ_{t+Δt}, ρ_{t−Δt}] so it carries no cancellation error.
inline CoareaCheck coarea_check(const RotationalSphere& s, double t, double dt) {
  const double h = s.h;
  if (!(t - dt > 0.0 && t + dt < h)) throw DomainError("coarea level too close to the ends");
  CoareaCheck c;
  c.t = t;
  c.dt = dt;
  const double r_plus = level_radius(s, t + dt);
  const double r_minus = level_radius(s, t - dt);
  const double drop = detail::cap_area_between(s.profile, r_plus, r_minus, 1e-14);
  c.dA_dt = -drop / (2 * dt);
  const double rt = level_radius(s, t);
  const double ef = s.profile.warp().exp_f(rt);
  const double ur = std::abs(s.profile.slope(rt));
  c.boundary_integral = -2 * kPi * std::sinh(rt) * std::sqrt(1 + ef * ef * ur * ur) / ur;
  c.residual = std::abs(c.dA_dt - c.boundary_integral);
  return c;
}

/// Coarea residual at an interior level (0.05h ≤ t ≤ 0.95h).
inline double coarea_residual(const RotationalSphere& s, double t, double dt_fraction = 1e-4) {
  if (t < 0.05 * s.h - 1e-15 || t > 0.95 * s.h + 1e-15) {
    throw DomainError("coarea level must lie in [0.05h, 0.95h]");
  }
  return coarea_check(s, t, dt_fraction * s.h).residual;
}

// ---------------------------------------------------------------------------
// Mesh export.

struct TriangleMesh {
  /// Disk-model embedding (tanh(ρ/2) cos θ, tanh(ρ/2) sin θ, z).
  std::vector<std::array<double, 3>> vertices;
  /// Chart coordinates (ρ, θ, z) per vertex.
  std::vector<std::array<double, 3>> chart;
  /// Zero-based vertex indices, counter-clockwise seen from outside.
  std::vector<std::array<std::size_t, 3>> faces;
};

/// Closed triangulation of the bi-graph: pole vertices at (0, 0, ±h), n_rho − 1
/// rings per hemisphere plus a shared equator ring at z = 0. Radii are uniform in
/// σ = √(ρ₀ − ρ), which concentrates rings where the surface turns vertical.
inline TriangleMesh export_mesh(const RotationalSphere& s, std::size_t n_rho,
                                std::size_t n_theta) {
  if (n_rho < 2 || n_theta < 3) throw InputError("mesh needs n_rho >= 2 and n_theta >= 3");
  const double r0 = s.rho0;
  std::vector<double> rho(n_rho + 1);
  for (std::size_t k = 0; k <= n_rho; ++k) {
    const double a = 1.0 - static_cast<double>(k) / static_cast<double>(n_rho);
    rho[k] = k == n_rho ? r0 : r0 * (1.0 - a * a);
  }
  std::vector<double> u = s.profile.u_on(rho);
  u.front() = s.h;
  u.back() = 0.0;

  TriangleMesh m;
  auto push = [&](double r, double th, double z) {
    const double rad = std::tanh(0.5 * r);
    m.vertices.push_back({rad * std::cos(th), rad * std::sin(th), z});
    m.chart.push_back({r, th, z});
    return m.vertices.size() - 1;
  };
  const double dth = 2 * kPi / static_cast<double>(n_theta);
  // Ring list from the top pole down to the bottom pole.
  std::vector<std::vector<std::size_t>> rings;
  const std::size_t top = push(0.0, 0.0, s.h);
  for (std::size_t k = 1; k <= n_rho; ++k) {
    std::vector<std::size_t> ring(n_theta);
    for (std::size_t j = 0; j < n_theta; ++j) ring[j] = push(rho[k], dth * j, u[k]);
    rings.push_back(std::move(ring));
  }
  for (std::size_t k = n_rho - 1; k >= 1; --k) {
    std::vector<std::size_t> ring(n_theta);
    for (std::size_t j = 0; j < n_theta; ++j) ring[j] = push(rho[k], dth * j, -u[k]);
    rings.push_back(std::move(ring));
  }
  const std::size_t bottom = push(0.0, 0.0, -s.h);

  for (std::size_t j = 0; j < n_theta; ++j) {
    const std::size_t jp = (j + 1) % n_theta;
    m.faces.push_back({top, rings.front()[j], rings.front()[jp]});
    m.faces.push_back({bottom, rings.back()[jp], rings.back()[j]});
  }
  for (std::size_t k = 0; k + 1 < rings.size(); ++k) {
    const auto& a = rings[k];
    const auto& b = rings[k + 1];
    for (std::size_t j = 0; j < n_theta; ++j) {
      const std::size_t jp = (j + 1) % n_theta;
      m.faces.push_back({a[j], b[j], b[jp]});
      m.faces.push_back({a[j], b[jp], a[jp]});
    }
  }
  return m;
}

/// Sum of triangle areas measured in the warped metric: edge lengths combine
/// the hyperbolic distance of the base points with e^f |Δz|, then Heron.
inline double mesh_riemannian_area(const TriangleMesh& m, const WarpField& w) {
  auto hyperboloid = [](const std::array<double, 3>& c) {
    const double sh = std::sinh(c[0]);
    return std::array<double, 3>{std::cosh(c[0]), sh * std::cos(c[1]), sh * std::sin(c[1])};
  };
  auto edge = [&](std::size_t a, std::size_t b) {
    const auto& ca = m.chart[a];
    const auto& cb = m.chart[b];
    const auto pa = hyperboloid(ca), pb = hyperboloid(cb);
    // Chordal form of the hyperboloid distance: stable for short edges.
    const double d0 = pa[0] - pb[0], d1 = pa[1] - pb[1], d2 = pa[2] - pb[2];
    const double chord = std::sqrt(std::max(d1 * d1 + d2 * d2 - d0 * d0, 0.0));
    const double base = 2 * std::asinh(0.5 * chord);
    const double ef = w.exp_f(0.5 * (ca[0] + cb[0]));
    const double vert = ef * (cb[2] - ca[2]);
    return std::sqrt(base * base + vert * vert);
  };
  double total = 0.0;
  for (const auto& f : m.faces) {
    const double a = edge(f[0], f[1]), b = edge(f[1], f[2]), c = edge(f[2], f[0]);
    const double p = 0.5 * (a + b + c);
    total += std::sqrt(std::max(p * (p - a) * (p - b) * (p - c), 0.0));
  }
  return total;
}

}  // namespace warpcmc
