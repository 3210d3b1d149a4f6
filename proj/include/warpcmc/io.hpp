#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "warpcmc/errors.hpp"
#include "warpcmc/profile.hpp"
#include "warpcmc/surface.hpp"

namespace warpcmc::io {

/// Shortest decimal string that round-trips to the same double.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw NumericError("number formatting failed", x);
  return std::string(buf, end);
}

inline double parse_double(const std::string& field) {
  std::string s = field;
  s.erase(0, s.find_first_not_of(" \t\r"));
  s.erase(s.find_last_not_of(" \t\r") + 1);
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || s.empty()) {
    throw InputError("not a number: '" + field + "'");
  }
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

/// Quotes a text field when it contains a separator, quote or newline.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + '"';
}

inline void write_profile_csv(std::ostream& os, const ProfileCurve& p) {
  os << "rho,u,du_drho\n";
  for (const auto& s : p.samples()) {
    os << format_double(s.rho) << ',' << format_double(s.u) << ',' << format_double(s.du_drho)
       << '\n';
  }
}

inline void write_levels_csv(std::ostream& os, const std::vector<LevelCircle>& levels) {
  os << "t,rho_t,L_t,A_t,Omega_t\n";
  for (const auto& c : levels) {
    os << format_double(c.t) << ',' << format_double(c.rho_t) << ',' << format_double(c.L_t)
       << ',' << format_double(c.area_cap_above) << ',' << format_double(c.disc_area) << '\n';
  }
}

/// Wavefront OBJ: `v x y z` lines, then `f i j k` with 1-based indices.
inline void write_obj(std::ostream& os, const TriangleMesh& m, const std::string& header) {
  std::istringstream hs(header);
  for (std::string line; std::getline(hs, line);) os << "# " << line << '\n';
  for (const auto& v : m.vertices) {
    os << "v " << format_double(v[0]) << ' ' << format_double(v[1]) << ' '
       << format_double(v[2]) << '\n';
  }
  for (const auto& f : m.faces) {
    os << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  }
}

/// Reads `rho,theta,u` rows into a GridField. The rows must cover a full
/// rectangular product of ρ values and a uniform θ partition of [0, 2π)
/// starting at 0, each point exactly once; order is free.
inline GridField read_grid_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InputError("empty grid CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "rho,theta,u") throw InputError("grid CSV header must be 'rho,theta,u'");
  std::vector<std::array<double, 3>> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 3) throw InputError("line " + std::to_string(lineno) + ": expected 3 fields");
    rows.push_back({parse_double(f[0]), parse_double(f[1]), parse_double(f[2])});
  }
  if (rows.empty()) throw InputError("grid CSV has no data rows");

  std::vector<double> rhos, thetas;
  for (const auto& r : rows) {
    rhos.push_back(r[0]);
    thetas.push_back(r[1]);
  }
  std::sort(rhos.begin(), rhos.end());
  rhos.erase(std::unique(rhos.begin(), rhos.end()), rhos.end());
  std::sort(thetas.begin(), thetas.end());
  thetas.erase(std::unique(thetas.begin(), thetas.end()), thetas.end());
  const std::size_t nth = thetas.size();
  if (rows.size() != rhos.size() * nth) throw InputError("grid CSV is not rectangular");
  const double dth = 2 * kPi / static_cast<double>(nth);
  for (std::size_t j = 0; j < nth; ++j) {
    if (std::abs(thetas[j] - dth * static_cast<double>(j)) > 1e-9) {
      throw InputError("theta values must be a uniform partition of [0, 2pi) from 0");
    }
  }
  GridField g = GridField::zeros(rhos, nth);
  std::vector<char> seen(g.values.size(), 0);
  for (const auto& r : rows) {
    const auto i = static_cast<std::size_t>(
        std::lower_bound(rhos.begin(), rhos.end(), r[0]) - rhos.begin());
    const auto j = static_cast<std::size_t>(
        std::lower_bound(thetas.begin(), thetas.end(), r[1]) - thetas.begin());
    const std::size_t n = i * nth + j;
    if (seen[n]) throw InputError("duplicate grid point in CSV");
    seen[n] = 1;
    g.values[n] = r[2];
  }
  return g;
}

inline void write_hfield_csv(std::ostream& os, const GridField& h) {
  os << "rho,theta,H\n";
  for (std::size_t i = 0; i < h.rho.size(); ++i)
    for (std::size_t j = 0; j < h.n_theta; ++j)
      os << format_double(h.rho[i]) << ',' << format_double(h.theta(j)) << ','
         << format_double(h.at(i, j)) << '\n';
}

inline void write_grid_csv(std::ostream& os, const GridField& u) {
  os << "rho,theta,u\n";
  for (std::size_t i = 0; i < u.rho.size(); ++i)
    for (std::size_t j = 0; j < u.n_theta; ++j)
      os << format_double(u.rho[i]) << ',' << format_double(u.theta(j)) << ','
         << format_double(u.at(i, j)) << '\n';
}

}  // namespace warpcmc::io
