#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "warpcmc/surface.hpp"

using namespace warpcmc;

namespace {

double logcosh_u(double H, double rho) {
  const double x = std::cosh(rho);
  const double x0 = H / std::sqrt(H * H - 1);
  const double s = std::sqrt(std::max(H * H - (H * H - 1) * x * x, 0.0));
  return 0.5 * std::log(x0 * (H + s) / (H * x));
}

const RotationalSphere& logcosh2() {
  static const RotationalSphere s = build_sphere(WarpField::log_cosh(), 2.0);
  return s;
}

GridField sample(const std::vector<double>& rho, std::size_t nth,
                 const std::function<double(double, double)>& fn) {
  auto g = GridField::zeros(rho, nth);
  for (std::size_t i = 0; i < rho.size(); ++i)
    for (std::size_t j = 0; j < nth; ++j) g.at(i, j) = fn(rho[i], g.theta(j));
  return g;
}

std::vector<double> uniform(double a, double b, std::size_t n) {
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = a + (b - a) * i / (n - 1);
  return r;
}

}  // namespace

TEST(MeanCurvature, ConstantGraphIsMinimal) {
  const auto u = sample(uniform(0.2, 2.0, 21), 16, [](double, double) { return 0.7; });
  for (const auto& w : {WarpField::log_cosh(), WarpField::constant(-0.3)}) {
    const auto h = mean_curvature_graph(u, w);
    for (double v : h.values) EXPECT_NEAR(v, 0.0, 1e-14);
  }
}

TEST(MeanCurvature, NonRotationalGraphAgainstAnalyticFlux) {
  // u = 0.3 ρ² + 0.2 ρ cos θ + 0.1 sin 2θ on the log-cosh warp. The oracle
  // evaluates the exact fluxes and differentiates them with 5-point stencils.
  const auto w = WarpField::log_cosh();
  auto u = [](double r, double t) { return 0.3 * r * r + 0.2 * r * std::cos(t) + 0.1 * std::sin(2 * t); };
  auto ur = [](double r, double t) { return 0.6 * r + 0.2 * std::cos(t); };
  auto ut = [](double r, double t) { return -0.2 * r * std::sin(t) + 0.2 * std::cos(2 * t); };
  auto W = [&](double r, double t) {
    const double sh = std::sinh(r);
    return std::sqrt(std::exp(-2 * w.f(r)) + ur(r, t) * ur(r, t) + ut(r, t) * ut(r, t) / (sh * sh));
  };
  auto fr = [&](double r, double t) { return std::sinh(r) * w.exp_f(r) * ur(r, t) / W(r, t); };
  auto ft = [&](double r, double t) { return w.exp_f(r) * ut(r, t) / W(r, t); };
  auto d5 = [](auto&& fn, double x, double h) {
    return (fn(x - 2 * h) - 8 * fn(x - h) + 8 * fn(x + h) - fn(x + 2 * h)) / (12 * h);
  };
  auto exact = [&](double r, double t) {
    const double sh = std::sinh(r);
    const double a = d5([&](double x) { return fr(x, t); }, r, 1e-3);
    const double b = d5([&](double x) { return ft(r, x); }, t, 1e-3);
    return -(a / sh + b / (sh * sh)) / (2 * w.exp_f(r));
  };
  // Edge rows use one-sided closures: same order, larger constant.
  auto max_err = [&](std::size_t n, bool edge) {
    const auto g = sample(uniform(0.4, 1.6, n), 4 * (n - 1), u);
    const auto h = mean_curvature_graph(g, w);
    double e = 0.0;
    for (std::size_t i = 0; i < g.rho.size(); ++i) {
      if (edge != (i == 0 || i + 1 == g.rho.size())) continue;
      for (std::size_t j = 0; j < g.n_theta; ++j)
        e = std::max(e, std::abs(h.at(i, j) - exact(g.rho[i], g.theta(j))));
    }
    return e;
  };
  for (bool edge : {false, true}) {
    const double e1 = max_err(49, edge), e2 = max_err(97, edge), e3 = max_err(193, edge);
    EXPECT_LT(e3, edge ? 2e-3 : 1e-3);
    EXPECT_GT(std::log2(e1 / e2), 1.8) << edge;
    EXPECT_GT(std::log2(e2 / e3), 1.8) << edge;
  }
}

TEST(MeanCurvature, SampledWarpMatchesAnalyticWarp) {
  const auto w = WarpField::log_cosh();
  const auto p = integrate_profile(w, 2.0, 0.0, 401);
  const auto u = rotational_graph(p, 0.1, 0.5, 1e-3, 8);
  const auto f = sample(u.rho, 8, [&](double r, double) { return w.f(r); });
  const auto a = mean_curvature_graph(u, w);
  const auto b = mean_curvature_graph(u, f);
  for (std::size_t i = 0; i < a.values.size(); ++i) EXPECT_NEAR(a.values[i], b.values[i], 1e-6);
  EXPECT_THROW(mean_curvature_graph(u, sample(uniform(0.1, 0.5, 7), 8, [](double, double) { return 0.0; })),
               InputError);
}

TEST(MeanCurvature, RecoversConfiguredH) {
  struct Case { WarpField w; double H; };
  for (const auto& c : {Case{WarpField::log_cosh(), 1.1}, Case{WarpField::log_cosh(), 2.0},
                        Case{WarpField::log_cosh(), 5.0}, Case{WarpField::constant(0.0), 0.6},
                        Case{WarpField::constant(0.0), 2.0}, Case{WarpField::constant(1.0), 1.0}}) {
    const auto p = integrate_profile(c.w, c.H, 0.0, 401);
    const double e1 = mc_consistency_error(p, 4e-3), e2 = mc_consistency_error(p, 2e-3),
                 e3 = mc_consistency_error(p, 1e-3);
    EXPECT_LE(e3, 1e-4) << c.w.name() << " " << c.H;
    EXPECT_GE(std::log2(e1 / e2), 1.9);
    EXPECT_GE(std::log2(e2 / e3), 1.9);
    EXPECT_GT(mc_consistency_error(p.scaled(1.01), 1e-3), 1e-3);
  }
}

TEST(MeanCurvature, RejectsBadGrids) {
  const auto w = WarpField::log_cosh();
  EXPECT_THROW(mean_curvature_graph(sample(uniform(0.1, 1, 4), 8, [](double, double) { return 0.0; }), w),
               InputError);
  EXPECT_THROW(mean_curvature_graph(sample(uniform(0.1, 1, 9), 6, [](double, double) { return 0.0; }), w),
               InputError);
  EXPECT_THROW(mean_curvature_graph(sample(uniform(0.0, 1, 9), 8, [](double, double) { return 0.0; }), w),
               InputError);
  auto g = sample(uniform(0.1, 1, 9), 8, [](double, double) { return 0.0; });
  g.values.pop_back();
  EXPECT_THROW(mean_curvature_graph(g, w), InputError);
}

TEST(Sphere, LogCoshCapClosedForms) {
  // A⁺ = 2π/(H² − 1), Vol(U₁) = π(H/(H² − 1) − ρ₀), h = ρ₀/2 for f = ln(2 cosh ρ).
  const auto& s = logcosh2();
  EXPECT_NEAR(s.A_plus, 2 * kPi / 3, 1e-11);
  EXPECT_NEAR(s.vol_U1, kPi * (2.0 / 3 - s.rho0), 1e-11);
  EXPECT_NEAR(s.h, 0.5 * s.rho0, 1e-11);
  EXPECT_DOUBLE_EQ(s.total_area(), 2 * s.A_plus);
  EXPECT_DOUBLE_EQ(s.total_volume(), 2 * s.vol_U1);
  EXPECT_DOUBLE_EQ(s.total_height(), 2 * s.h);
}

TEST(Sphere, AreaAgainstMidpointSum) {
  const auto& s = logcosh2();
  const double H = 2.0, r0 = s.rho0;
  const int n = 1000000;
  const double ds = std::sqrt(r0) / n;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double sg = (i + 0.5) * ds, rho = r0 - sg * sg;
    const double sh = std::sinh(rho), ef = 2 * std::cosh(rho), G = -2 * H * sh * sh;
    sum += 2 * sg * ef * sh * sh / std::sqrt(ef * ef * sh * sh - G * G);
  }
  const double oracle = 2 * kPi * sum * ds;
  EXPECT_NEAR(s.A_plus, oracle, 1e-6 * oracle);
}

TEST(Sphere, VolumeAgainstRiemannSum) {
  // Cells (ρ, t) of the region 0 ≤ t ≤ u(ρ) weighted by e^f sinh ρ, θ integrated out.
  const auto& s = logcosh2();
  const int nr = 4000, nt = 4000;
  const double dr = s.rho0 / nr, dt = s.h / nt;
  double sum = 0.0;
  for (int i = 0; i < nr; ++i) {
    const double r = (i + 0.5) * dr;
    const double top = logcosh_u(2.0, r);
    const auto cells = static_cast<int>(std::floor(top / dt + 0.5));
    sum += cells * 2 * std::cosh(r) * std::sinh(r);
  }
  const double oracle = 2 * kPi * sum * dr * dt;
  EXPECT_NEAR(s.vol_U1, oracle, 1e-5 * oracle);
}

TEST(Sphere, ConstantLevelInvariants) {
  const auto s0 = build_sphere(WarpField::constant(0.0), 1.0);
  for (double c : {-1.0, 1.0}) {
    const auto s = build_sphere(WarpField::constant(c), 1.0);
    EXPECT_NEAR(s.rho0, s0.rho0, 1e-12);
    EXPECT_NEAR(s.h, std::exp(-c) * s0.h, 1e-9);
    EXPECT_NEAR(s.A_plus, s0.A_plus, 1e-8 * s0.A_plus);
    EXPECT_NEAR(s.vol_U1, s0.vol_U1, 1e-8 * s0.vol_U1);
  }
}

TEST(Levels, RadiusAgainstDenseInverseInterpolation) {
  const auto& s = logcosh2();
  const int n = 200000;
  std::vector<double> r(n + 1), u(n + 1);
  for (int i = 0; i <= n; ++i) {
    r[i] = s.rho0 * i / n;
    u[i] = logcosh_u(2.0, r[i]);
  }
  for (double frac : {0.1, 0.25, 0.5, 0.75, 0.9}) {
    const double t = frac * s.h;
    int k = 0;
    while (u[k + 1] >= t) ++k;
    const double oracle = r[k] + (r[k + 1] - r[k]) * (u[k] - t) / (u[k] - u[k + 1]);
    EXPECT_NEAR(level_radius(s, t), oracle, 1e-8) << frac;
  }
  EXPECT_EQ(level_radius(s, 0.0), s.rho0);
  EXPECT_THROW(level_radius(s, s.h), DomainError);
  EXPECT_THROW(level_radius(s, -0.1), DomainError);
}

TEST(Levels, CircleQuantities) {
  const auto& s = logcosh2();
  const auto c = level_circle(s, 0.5 * s.h);
  EXPECT_NEAR(c.L_t, 2 * kPi * std::sinh(c.rho_t), 1e-14);
  EXPECT_NEAR(c.disc_area, 2 * kPi * (std::cosh(c.rho_t) - 1), 1e-13);
  // Cap above t is part of the cap; the whole cap is A⁺.
  EXPECT_GT(c.area_cap_above, 0.0);
  EXPECT_LT(c.area_cap_above, s.A_plus);
}

TEST(Levels, TangentialDecomposition) {
  const auto& s = logcosh2();
  for (double f : {0.2, 0.6, 0.95}) {
    const double r = f * s.rho0;
    const auto [T, nu] = tangential_decomposition(s, r);
    const double ef = s.profile.warp().exp_f(r);
    EXPECT_NEAR(T * T + nu * nu, ef * ef, 1e-12 * ef * ef);
    EXPECT_LT(nu, 0.0);
  }
  EXPECT_THROW(tangential_decomposition(s, s.rho0), DomainError);
}

TEST(Flux, CorrectedVanishesLiteralDoesNot) {
  const auto& s = logcosh2();
  double corr = 0.0, lit = 0.0;
  for (int i = 1; i < 200; ++i) {
    const auto r = flux_first_integral_residual(s, s.rho0 * i / 200);
    corr = std::max(corr, r.corrected);
    lit = std::max(lit, r.as_printed);
  }
  EXPECT_LE(corr, 1e-8);
  EXPECT_GT(lit, 1e-3);
  const auto s0 = build_sphere(WarpField::constant(0.0), 1.0);
  const auto r0 = flux_first_integral_residual(s0, 0.5 * s0.rho0);
  EXPECT_EQ(r0.corrected, r0.as_printed);
  EXPECT_THROW(flux_first_integral_residual(s, 0.0), DomainError);
}

TEST(Coarea, ResidualAndSecondOrder) {
  const auto& s = logcosh2();
  for (double frac : {0.25, 0.5, 0.75}) {
    const double t = frac * s.h;
    EXPECT_LE(coarea_residual(s, t), 1e-6);
    const double a = coarea_check(s, t, 4e-4 * s.h).residual;
    const double b = coarea_check(s, t, 2e-4 * s.h).residual;
    EXPECT_NEAR(std::log2(a / b), 2.0, 0.1);
  }
  EXPECT_THROW(coarea_residual(s, 0.01 * s.h), DomainError);
  EXPECT_THROW(coarea_check(s, 0.5 * s.h, 0.6 * s.h), DomainError);
}

namespace {

struct EdgeCount {
  std::size_t edges = 0;
  bool manifold = true;
};

EdgeCount edges(const TriangleMesh& m) {
  std::map<std::pair<std::size_t, std::size_t>, int> e;
  for (const auto& f : m.faces)
    for (int k = 0; k < 3; ++k) {
      const auto a = f[k], b = f[(k + 1) % 3];
      ++e[{std::min(a, b), std::max(a, b)}];
    }
  EdgeCount c;
  c.edges = e.size();
  for (const auto& [k, n] : e) c.manifold = c.manifold && n == 2;
  return c;
}

double signed_volume(const TriangleMesh& m) {
  double v = 0.0;
  for (const auto& f : m.faces) {
    const auto& a = m.vertices[f[0]];
    const auto& b = m.vertices[f[1]];
    const auto& c = m.vertices[f[2]];
    v += (a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) +
          a[2] * (b[0] * c[1] - b[1] * c[0])) / 6.0;
  }
  return v;
}

}  // namespace

TEST(Mesh, ClosedOrientedManifold) {
  const auto& s = logcosh2();
  for (auto [nr, nt] : {std::pair<std::size_t, std::size_t>{2, 3}, {8, 12}, {32, 48}}) {
    const auto m = export_mesh(s, nr, nt);
    const auto e = edges(m);
    EXPECT_TRUE(e.manifold);
    const auto chi = static_cast<long>(m.vertices.size()) - static_cast<long>(e.edges) +
                     static_cast<long>(m.faces.size());
    EXPECT_EQ(chi, 2);
    EXPECT_GT(signed_volume(m), 0.0);
  }
}

TEST(Mesh, HeightAndEquator) {
  const auto& s = logcosh2();
  const auto m = export_mesh(s, 16, 24);
  double zmax = 0.0;
  for (const auto& v : m.vertices) zmax = std::max(zmax, std::abs(v[2]));
  EXPECT_DOUBLE_EQ(zmax, s.h);
  std::size_t on_equator = 0;
  for (const auto& c : m.chart) {
    if (c[0] == s.rho0) {
      ++on_equator;
      EXPECT_LE(std::abs(c[2]), 1e-12);
    }
  }
  EXPECT_EQ(on_equator, 24u);
  EXPECT_THROW(export_mesh(s, 1, 8), InputError);
  EXPECT_THROW(export_mesh(s, 8, 2), InputError);
}

TEST(Mesh, RiemannianAreaConvergesToSphereArea) {
  const auto& s = logcosh2();
  const auto w = WarpField::log_cosh();
  const double target = s.total_area();
  const double e1 = std::abs(mesh_riemannian_area(export_mesh(s, 16, 32), w) - target);
  const double e2 = std::abs(mesh_riemannian_area(export_mesh(s, 64, 128), w) - target);
  EXPECT_LT(e2, e1);
  EXPECT_LT(e2, 1e-2 * target);
}
