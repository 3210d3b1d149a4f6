#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "warpcmc/io.hpp"
#include "warpcmc/pipeline.hpp"

using namespace warpcmc;
namespace wp = warpcmc::pipeline;

TEST(Format, ShortestRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, 0.5493061443340549, -2.5e-300, 1e21, 6.02214076e23}) {
    const auto s = io::format_double(x);
    EXPECT_EQ(io::parse_double(s), x) << s;
  }
  EXPECT_EQ(io::format_double(0.1), "0.1");
  EXPECT_EQ(io::format_double(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(io::parse_double("-inf"), -std::numeric_limits<double>::infinity());
  EXPECT_THROW(io::parse_double("1.5x"), InputError);
  EXPECT_THROW(io::parse_double(""), InputError);
}

TEST(Csv, FieldQuoting) {
  EXPECT_EQ(io::csv_field("no turning radius"), "no turning radius");
  EXPECT_EQ(io::csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(io::csv_field("say \"x\""), "\"say \"\"x\"\"\"");
}

TEST(Csv, ProfileLayout) {
  const auto p = integrate_profile(WarpField::log_cosh(), 2.0, 0.0, 5);
  std::ostringstream os;
  io::write_profile_csv(os, p);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "rho,u,du_drho");
  std::vector<std::string> rows;
  while (std::getline(is, line)) rows.push_back(line);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows.front().substr(0, 2), "0,");
  EXPECT_EQ(rows.back().substr(rows.back().size() - 4), "-inf");
}

TEST(GridCsv, RoundTripAnyOrder) {
  auto g = GridField::zeros({0.5, 0.75, 1.0}, 4);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 4; ++j) g.at(i, j) = 10.0 * i + j;
  std::ostringstream os;
  io::write_grid_csv(os, g);
  // Reverse the data rows; the reader must not depend on order.
  std::istringstream is(os.str());
  std::string header, line;
  std::getline(is, header);
  std::vector<std::string> rows;
  while (std::getline(is, line)) rows.push_back(line);
  std::string shuffled = header + "\n";
  for (auto it = rows.rbegin(); it != rows.rend(); ++it) shuffled += *it + "\n";
  std::istringstream in(shuffled);
  const auto back = io::read_grid_csv(in);
  EXPECT_EQ(back.rho, g.rho);
  EXPECT_EQ(back.n_theta, g.n_theta);
  EXPECT_EQ(back.values, g.values);
}

TEST(GridCsv, Validation) {
  auto read = [](const std::string& s) {
    std::istringstream is(s);
    return io::read_grid_csv(is);
  };
  EXPECT_THROW(read(""), InputError);
  EXPECT_THROW(read("r,t,u\n1,0,0\n"), InputError);
  EXPECT_THROW(read("rho,theta,u\n"), InputError);
  EXPECT_THROW(read("rho,theta,u\n1,0\n"), InputError);
  EXPECT_THROW(read("rho,theta,u\n1,0,abc\n"), InputError);
  // Missing (2, π): not rectangular.
  EXPECT_THROW(read("rho,theta,u\n1,0,0\n1,3.141592653589793,0\n2,0,0\n"), InputError);
  // Duplicate point.
  EXPECT_THROW(read("rho,theta,u\n1,0,0\n1,0,1\n2,3.141592653589793,0\n2,0,0\n"), InputError);
  // θ not a uniform partition from 0.
  EXPECT_THROW(read("rho,theta,u\n1,0.1,0\n1,3.2,0\n2,0.1,0\n2,3.2,0\n"), InputError);
}

TEST(Obj, HeaderVerticesFaces) {
  TriangleMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  m.chart = m.vertices;
  m.faces = {{0, 1, 2}};
  std::ostringstream os;
  io::write_obj(os, m, "line one\nline two");
  EXPECT_EQ(os.str(), "# line one\n# line two\nv 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
}

TEST(Config, JsonOverridesDefaults) {
  wp::RunConfig c;
  wp::apply_json(c, wp::json::parse(R"({
    "family": "constant", "family_params": {"c": 0.7}, "H": 1.5, "d": 0,
    "quad_tol": 1e-9, "grid": {"n_rho": 12, "n_theta": 9},
    "H_values": [1, 2], "outputs": {"profile": "p.csv"}, "out": "x"})"));
  EXPECT_EQ(c.family, "constant");
  EXPECT_EQ(c.c, 0.7);
  EXPECT_EQ(c.H, 1.5);
  EXPECT_EQ(c.quad_tol, 1e-9);
  EXPECT_EQ(c.root_tol, 1e-12);
  EXPECT_EQ(c.n_rho, 12u);
  EXPECT_EQ(c.n_theta, 9u);
  EXPECT_EQ(c.H_values, (std::vector<double>{1, 2}));
  EXPECT_EQ(c.output("profile"), std::filesystem::path("x") / "p.csv");
  EXPECT_EQ(c.output("report"), std::filesystem::path("x") / "report.json");
  EXPECT_NO_THROW(wp::validate(c));
}

TEST(Config, RejectsInvalid) {
  wp::RunConfig c;
  EXPECT_THROW(wp::apply_json(c, wp::json::parse(R"({"colour": 1})")), InputError);
  EXPECT_THROW(wp::apply_json(c, wp::json::parse(R"({"H": "two"})")), InputError);
  EXPECT_THROW(wp::apply_json(c, wp::json::parse(R"({"grid": {"n_rho": -3}})")), InputError);
  EXPECT_THROW(wp::apply_json(c, wp::json::parse(R"([1, 2])")), InputError);
  auto bad = [](auto mutate) {
    wp::RunConfig k;
    mutate(k);
    return k;
  };
  EXPECT_THROW(wp::validate(bad([](auto& k) { k.family = "cubic"; })), InputError);
  EXPECT_THROW(wp::validate(bad([](auto& k) { k.H = 0.0; })), InputError);
  EXPECT_THROW(wp::validate(bad([](auto& k) { k.quad_tol = 0.0; })), InputError);
  EXPECT_THROW(wp::validate(bad([](auto& k) { k.root_tol = 0.02; })), InputError);
  EXPECT_THROW(wp::validate(bad([](auto& k) { k.n_theta = 2; })), InputError);
  EXPECT_THROW(wp::validate(bad([](auto& k) { k.family = "table"; })), InputError);
  EXPECT_NO_THROW(wp::validate(bad([](auto& k) { k.abs_tol = 1e-2; })));
}

TEST(Config, FluxConstantMapping) {
  wp::RunConfig c;
  c.H = 2.0;
  EXPECT_EQ(wp::d_mapping(c)["d_closed_form"].get<double>(), 2.0);
  c.family = "constant";
  c.c = 0.0;
  c.H = 1.0;
  EXPECT_EQ(wp::d_mapping(c)["d_closed_form"].get<double>(), 2.0);
}
