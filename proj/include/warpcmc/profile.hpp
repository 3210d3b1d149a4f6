#pragma once

// Admissibility analysis, turning radius, and integration of the rotational
// CMC profile
//
//   u_ρ = G / (e^f √(e^{2f} sinh²ρ − G²)),   G(ρ) = d − 2H F(ρ),
//
// on [0, ρ₀]. The branch is fixed so that u ≥ 0 is decreasing (downward unit
// normal): u_ρ = −|G| / (e^f √P) with P = e^{2f} sinh²ρ − G².

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "warpcmc/errors.hpp"
#include "warpcmc/numerics.hpp"
#include "warpcmc/warp_field.hpp"

namespace warpcmc {

struct SolverOptions {
  double quad_tol = kDefaultQuadTol;
  double root_tol = 1e-12;
  double rho_max = kDefaultRhoMax;
  double march_step = 1e-2;
};

struct TurningPoint {
  double rho0 = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  /// P(ρ₀) at the returned root.
  double residual = 0.0;
};

struct Violation {
  /// One of "a".."e" (G(0)=0, G single-signed and nonzero, |G| < e^f sinh ρ,
  /// flat at the axis, vertical at ρ₀).
  std::string condition;
  double rho = 0.0;
  std::string detail;
};

struct AdmissibilityReport {
  bool admissible = false;
  double H = 0.0;
  double d = 0.0;
  double rho0 = 0.0;
  std::vector<Violation> violations;
};

struct ProfileSample {
  double rho = 0.0;
  double u = 0.0;
  double du_drho = 0.0;
};

inline double flux_G(const WarpField& w, double H, double d, double rho) {
  return d - 2.0 * H * w.F(rho);
}

/// P(ρ) = e^{2f} sinh²ρ − G(ρ)².
inline double turning_gap(const WarpField& w, double H, double d, double rho) {
  const double a = w.volume_element(rho);
  const double g = flux_G(w, H, d, rho);
  return (a - std::abs(g)) * (a + std::abs(g));
}

namespace detail {
// e^f sinh ρ − |G(ρ)|: same sign as P, simple root at ρ₀.
inline double gap_factor(const WarpField& w, double H, double d, double rho) {
  return w.volume_element(rho) - std::abs(flux_G(w, H, d, rho));
}
}  // namespace detail

inline constexpr double kSignNoise = 1e-10;

/// Smallest ρ₀ > 0 with P(ρ₀) = 0: forward march for the first sign change of
/// P, then bracketed refinement.
///
/// Throws NoSphereError when P keeps its sign up to rho_max.
inline TurningPoint turning_radius(const WarpField& w, double H, double d,
                                   const SolverOptions& opt = {}) {
  if (!(H > 0.0)) throw InputError("H must be positive");
  const double rho_max = std::min(opt.rho_max, w.max_radius());
  auto q = [&](double r) { return detail::gap_factor(w, H, d, r); };

  double lo = 0.0;
  double qlo = q(0.0);
  if (qlo == 0.0) {
    // d = 0: P vanishes at the axis and is positive just to the right of it.
    double eps = std::min(opt.march_step, rho_max);
    while (q(eps) <= 0.0 && eps > 1e-12) eps *= 0.5;
    lo = eps;
    qlo = q(eps);
  }
  // Q is a difference of two terms that can both be large; a sign read off a
  // value within roundoff of zero is not trusted (log-cosh at H = 1 has Q > 0
  // decaying like e^{-2ρ} relative to its terms).
  auto resolved = [&](double r, double v) {
    return std::abs(v) > kSignNoise * (w.volume_element(r) + std::abs(flux_G(w, H, d, r)));
  };
  double hi = lo;
  double qhi = qlo;
  while (true) {
    if (hi >= rho_max) {
      throw NoSphereError("no turning radius; H too small for this warping");
    }
    hi = std::min(hi + opt.march_step, rho_max);
    qhi = q(hi);
    if (!resolved(hi, qhi)) continue;
    if ((qhi > 0) != (qlo > 0)) break;
    lo = hi;
    qlo = qhi;
  }
  const double blo = lo, bhi = hi;
  auto br = refine_root(q, lo, hi, qlo, qhi);
  const double rho0 = std::abs(q(br.second)) < std::abs(q(br.first)) ? br.second : br.first;
  TurningPoint tp{rho0, blo, bhi, turning_gap(w, H, d, rho0)};
  const double scale = std::max(1.0, w.volume_element(rho0) * w.volume_element(rho0));
  if (std::abs(tp.residual) > opt.root_tol * scale) {
    throw NumericError("turning radius residual above root_tol", std::abs(tp.residual));
  }
  return tp;
}

/// Evaluator of the profile slope that stays accurate up to ρ₀: within the
/// last stretch before the turning point P is rebuilt from the integral of its
/// factor's derivative rather than by subtracting two O(1) terms.
class SlopeEvaluator {
 public:
  SlopeEvaluator(WarpField w, double H, double d, double rho0)
      : w_(std::move(w)), H_(H), d_(d), rho0_(rho0) {
    sign_G_ = flux_G(w_, H_, d_, 0.5 * rho0_) < 0 ? -1.0 : 1.0;
  }

  const WarpField& warp() const { return w_; }
  double H() const { return H_; }
  double d() const { return d_; }
  double rho0() const { return rho0_; }

  /// Q(ρ) = e^f sinh ρ − |G(ρ)|, which is positive on (0, ρ₀).
  double gap_factor(double rho) const {
    if (rho0_ - rho > kNearFraction * rho0_) return detail::gap_factor(w_, H_, d_, rho);
    return mean_decay(rho) * (rho0_ - rho);
  }

  /// P(ρ) via its factorization (e^f sinh − |G|)(e^f sinh + |G|).
  double gap(double rho) const {
    return gap_factor(rho) * (w_.volume_element(rho) + std::abs(flux_G(w_, H_, d_, rho)));
  }

  /// |u_ρ(ρ)| for 0 < ρ < ρ₀.
  double abs_slope(double rho) const {
    const double g = std::abs(flux_G(w_, H_, d_, rho));
    const double p = gap(rho);
    if (!(p > 0.0)) throw NumericError("profile slope requested where P <= 0", p);
    return g / (w_.exp_f(rho) * std::sqrt(p));
  }

  /// 2σ |u_ρ(ρ₀ − σ²)|: bounded and smooth on [0, √ρ₀]. Near ρ₀ the factor σ
  /// is cancelled analytically against Q = σ² · (mean of −Q'), so the value
  /// stays exact even when ρ₀ − σ² rounds to ρ₀.
  double sigma_integrand(double sigma) const {
    if (sigma <= 0.0) return 0.0;
    const double s2 = sigma * sigma;
    const double rho = std::max(rho0_ - s2, 0.0);
    if (rho <= 0.0) return 0.0;
    if (s2 > kNearFraction * rho0_) return 2.0 * sigma * abs_slope(rho);
    const double g = std::abs(flux_G(w_, H_, d_, rho));
    const double m = mean_decay(rho) * (w_.volume_element(rho) + g);
    if (!(m > 0.0)) throw NumericError("profile slope requested where P <= 0", m);
    return 2.0 * g / (w_.exp_f(rho) * std::sqrt(m));
  }

 private:
  double dq(double r) const {
    const double ef = w_.exp_f(r);
    return ef * (w_.df(r) * std::sinh(r) + std::cosh(r)) + sign_G_ * 2.0 * H_ * ef * std::sinh(r);
  }
  // Mean of −Q' over [ρ, ρ₀], so that Q(ρ) = mean_decay(ρ) (ρ₀ − ρ).
  double mean_decay(double rho) const {
    const double len = rho0_ - rho;
    if (!(len > 0.0)) return -dq(rho0_);
    return -integrate_panel([this](double r) { return dq(r); }, rho, rho0_) / len;
  }

  static constexpr double kNearFraction = 0.05;
  WarpField w_;
  double H_, d_, rho0_;
  double sign_G_ = -1.0;
};

/// u_ρ(ρ) on the decreasing branch, for 0 < ρ < ρ₀.
inline double profile_derivative(const WarpField& w, double H, double d, double rho,
                                 double rho0) {
  if (!(rho > 0.0 && rho < rho0)) throw DomainError("profile slope needs 0 < rho < rho0");
  return -SlopeEvaluator(w, H, d, rho0).abs_slope(rho);
}

inline double profile_derivative(const WarpField& w, double H, double d, double rho,
                                 const SolverOptions& opt = {}) {
  return profile_derivative(w, H, d, rho, turning_radius(w, H, d, opt).rho0);
}

/// Checks the admissibility conditions on a dense grid over (0, ρ₀].
/// Propagates NoSphereError from turning_radius.
inline AdmissibilityReport check_admissible(const WarpField& w, double H, double d,
                                            const SolverOptions& opt = {}) {
  AdmissibilityReport rep;
  rep.H = H;
  rep.d = d;
  const auto tp = turning_radius(w, H, d, opt);
  rep.rho0 = tp.rho0;
  const double rho0 = tp.rho0;
  auto add = [&](std::string id, double rho, std::string what) {
    rep.violations.push_back({std::move(id), rho, std::move(what)});
  };

  // (a) G(0) = 0.
  const double g0 = flux_G(w, H, d, 0.0);
  if (std::abs(g0) > 1e-14 * std::max(1.0, std::abs(d))) {
    std::ostringstream os;
    os << "G(0) = " << g0 << " != 0";
    add("a", 0.0, os.str());
  }

  // (b) G nonzero and single-signed on (0, ρ₀]; (c) |G| < e^f sinh ρ inside.
  constexpr int kGrid = 2000;
  const double sign_ref = flux_G(w, H, d, 0.5 * rho0) < 0 ? -1.0 : 1.0;
  bool b_found = false, c_found = false;
  for (int i = 1; i <= kGrid; ++i) {
    const double r = rho0 * i / kGrid;
    const double g = flux_G(w, H, d, r);
    if (!b_found && (g == 0.0 || (g < 0 ? -1.0 : 1.0) != sign_ref)) {
      add("b", r, "G vanishes or changes sign");
      b_found = true;
    }
    if (!c_found && i < kGrid && std::abs(g) >= w.volume_element(r)) {
      add("c", r, "|G| >= e^f sinh(rho)");
      c_found = true;
    }
  }
  if (!rep.violations.empty()) return rep;

  SlopeEvaluator slope(w, H, d, rho0);
  // (d) flat at the axis with finite curvature: u_ρ(ρ)/ρ settles to a limit.
  {
    const double e1 = 1e-4 * rho0, e2 = 1e-5 * rho0, e3 = 1e-6 * rho0;
    const double s1 = slope.abs_slope(e1), s2 = slope.abs_slope(e2), s3 = slope.abs_slope(e3);
    const double k2 = s2 / e2, k3 = s3 / e3;
    if (!(s3 < 1e-4) || !std::isfinite(k3) ||
        std::abs(k2 - k3) > 1e-3 * std::max(1.0, std::abs(k3)) || !(s3 <= s1)) {
      add("d", e3, "slope does not vanish linearly at the axis");
    }
  }
  // (e) vertical at ρ₀: |u_ρ| grows without bound like (ρ₀ − ρ)^{-1/2}.
  {
    const double s4 = slope.abs_slope(rho0 * (1 - 1e-4));
    const double s8 = slope.abs_slope(rho0 * (1 - 1e-8));
    if (!(s8 > 50.0 * s4)) {
      add("e", rho0, "slope does not blow up at the turning radius");
    }
  }
  rep.admissible = rep.violations.empty();
  return rep;
}

/// Sampled generating curve of the upper half-sphere. Besides the samples it
/// keeps the slope evaluator so u can be evaluated anywhere on [0, ρ₀].
class ProfileCurve {
 public:
  ProfileCurve(SlopeEvaluator slope, std::vector<ProfileSample> samples,
               std::vector<double> sigma, double quad_tol)
      : slope_(std::move(slope)),
        samples_(std::move(samples)),
        sigma_(std::move(sigma)),
        quad_tol_(quad_tol) {}

  const std::vector<ProfileSample>& samples() const { return samples_; }
  double rho0() const { return slope_.rho0(); }
  /// h = u(0).
  double height() const { return samples_.front().u; }
  const WarpField& warp() const { return slope_.warp(); }
  double H() const { return slope_.H(); }
  double d() const { return slope_.d(); }
  const SlopeEvaluator& slope_evaluator() const { return slope_; }

  /// u_ρ(ρ); 0 at the axis and −∞ at ρ₀.
  double slope(double rho) const {
    if (rho < 0.0 || rho > rho0()) throw DomainError("rho outside [0, rho0]");
    if (rho == 0.0) return 0.0;
    if (rho == rho0()) return -std::numeric_limits<double>::infinity();
    return -u_scale_ * slope_.abs_slope(rho);
  }

  /// u(ρ) = ∫_ρ^{ρ₀} |u_ρ|, evaluated from the nearest sample.
  double u(double rho) const {
    if (rho < 0.0 || rho > rho0()) throw DomainError("rho outside [0, rho0]");
    const double s = std::sqrt(std::max(rho0() - rho, 0.0));
    // sigma_ is decreasing (sample 0 is the axis).
    auto it = std::lower_bound(sigma_.begin(), sigma_.end(), s, std::greater<double>());
    std::size_t k = it == sigma_.end() ? sigma_.size() - 1 : static_cast<std::size_t>(it - sigma_.begin());
    // sigma_[k] <= s; integrate from sigma_[k] up to s.
    auto g = [this](double x) { return slope_.sigma_integrand(x); };
    return samples_[k].u + u_scale_ * integrate(g, sigma_[k], s, 1e-13, 1e-300).value;
  }

  /// u on an increasing list of radii, by cumulative panel sums so that
  /// neighbouring values carry correlated (not independent) quadrature error.
  /// With `relative` the result is u − u(rhos[0]).
  std::vector<double> u_on(const std::vector<double>& rhos, bool relative = false) const {
    std::vector<double> out(rhos.size());
    if (rhos.empty()) return out;
    auto g = [this](double x) { return slope_.sigma_integrand(x); };
    out[0] = relative ? 0.0 : u(rhos[0]);
    for (std::size_t i = 1; i < rhos.size(); ++i) {
      if (rhos[i] < rhos[i - 1]) throw InputError("radii must be increasing");
      const double s0 = std::sqrt(std::max(rho0() - rhos[i - 1], 0.0));
      const double s1 = std::sqrt(std::max(rho0() - rhos[i], 0.0));
      out[i] = out[i - 1] - u_scale_ * integrate(g, s1, s0, 1e-13, 1e-300).value;
    }
    return out;
  }

  /// Copy with u scaled by `factor` (negative-control hook).
  ProfileCurve scaled(double factor) const {
    ProfileCurve c = *this;
    c.u_scale_ *= factor;
    for (auto& s : c.samples_) {
      s.u *= factor;
      s.du_drho *= factor;
    }
    return c;
  }
  double u_scale() const { return u_scale_; }

 private:
  SlopeEvaluator slope_;
  std::vector<ProfileSample> samples_;
  std::vector<double> sigma_;
  double quad_tol_;
  double u_scale_ = 1.0;
};

/// Integrates the profile on a grid uniform in σ = √(ρ₀ − ρ) (clustered near
/// ρ₀), from the equator inward, with the substitution ρ = ρ₀ − σ² removing the
/// 1/√(ρ₀ − ρ) endpoint singularity.
///
/// Throws NoSphereError if (w, H, d) is not admissible.
inline ProfileCurve integrate_profile(const WarpField& w, double H, double d, std::size_t n,
                                      const SolverOptions& opt = {}) {
  if (n < 3) throw InputError("profile needs at least 3 samples");
  const auto rep = check_admissible(w, H, d, opt);
  if (!rep.admissible) {
    std::ostringstream os;
    os << "not admissible:";
    for (const auto& v : rep.violations) os << " (" << v.condition << ") " << v.detail << ";";
    throw NoSphereError(os.str());
  }
  const double rho0 = rep.rho0;
  SlopeEvaluator slope(w, H, d, rho0);
  const double smax = std::sqrt(rho0);
  std::vector<double> sigma(n);
  std::vector<ProfileSample> samples(n);
  for (std::size_t k = 0; k < n; ++k) {
    sigma[k] = smax * static_cast<double>(n - 1 - k) / static_cast<double>(n - 1);
    samples[k].rho = k == 0 ? 0.0 : (k == n - 1 ? rho0 : rho0 - sigma[k] * sigma[k]);
  }
  auto g = [&](double x) { return slope.sigma_integrand(x); };
  samples[n - 1].u = 0.0;
  for (std::size_t k = n - 1; k-- > 0;) {
    samples[k].u = samples[k + 1].u + integrate(g, sigma[k + 1], sigma[k], opt.quad_tol * 1e-3,
                                                1e-300).value;
  }
  samples[0].du_drho = 0.0;
  samples[n - 1].du_drho = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k + 1 < n; ++k) samples[k].du_drho = -slope.abs_slope(samples[k].rho);
  return ProfileCurve(std::move(slope), std::move(samples), std::move(sigma), opt.quad_tol);
}

}  // namespace warpcmc
