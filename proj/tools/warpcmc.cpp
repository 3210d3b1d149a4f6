// warpcmc: rotational CMC spheres in H ×_f R from the command line.
//
//   warpcmc solve --family log_cosh --H 2 --out run/
//   warpcmc verify --family constant --c 1 --H 1
//   warpcmc sweep --family log_cosh --H-values 1,1.1,1.5,2,3,5
//   warpcmc mesh --H 2 --n-rho 32 --n-theta 48
//   warpcmc curvature --input grid.csv
//
// Exit codes: 0 ok, 1 bad input, 2 no admissible sphere, 3 verification failed.

#include <CLI11.hpp>

#include <functional>
#include <optional>

#include "warpcmc/pipeline.hpp"

namespace {

using warpcmc::pipeline::RunConfig;

struct Flags {
  std::optional<std::string> family, out, config, input;
  std::optional<double> c, H, d, quad_tol, root_tol, abs_tol, inject;
  std::optional<std::size_t> n_rho, n_theta, samples;
  std::vector<double> H_values;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--family", f.family, "warping family: constant, log_cosh, table");
  cmd->add_option("--c", f.c, "constant warp level (f = c)");
  cmd->add_option("--H", f.H, "mean curvature H > 0");
  cmd->add_option("--d", f.d, "flux constant d (0 for spheres)");
  cmd->add_option("--quad-tol", f.quad_tol, "relative quadrature tolerance");
  cmd->add_option("--root-tol", f.root_tol, "turning-point residual tolerance");
  cmd->add_option("--abs-tol", f.abs_tol, "inequality verdict tolerance coefficient");
  cmd->add_option("--n-rho", f.n_rho, "mesh rings per hemisphere");
  cmd->add_option("--n-theta", f.n_theta, "mesh points per ring");
  cmd->add_option("--samples", f.samples, "profile samples");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--config", f.config, "JSON config file");
}

RunConfig resolve(const Flags& f) {
  RunConfig c;
  if (f.config) warpcmc::pipeline::apply_json(c, warpcmc::pipeline::load_json_file(*f.config));
  if (f.family) c.family = *f.family;
  if (f.c) c.c = *f.c;
  if (f.H) c.H = *f.H;
  if (f.d) c.d = *f.d;
  if (f.quad_tol) c.quad_tol = *f.quad_tol;
  if (f.root_tol) c.root_tol = *f.root_tol;
  if (f.abs_tol) c.abs_tol = *f.abs_tol;
  if (f.n_rho) c.n_rho = *f.n_rho;
  if (f.n_theta) c.n_theta = *f.n_theta;
  if (f.samples) c.profile_samples = *f.samples;
  if (f.out) c.out_dir = *f.out;
  if (f.input) c.input = *f.input;
  if (f.inject) c.inject_error = *f.inject;
  if (!f.H_values.empty()) c.H_values = f.H_values;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  namespace wp = warpcmc::pipeline;
  wp::configure_logging();

  CLI::App app{"Rotational constant mean curvature spheres in warped products H x_f R"};
  app.require_subcommand(1);
  Flags flags;
  std::function<int(const RunConfig&)> command;

  auto* solve = app.add_subcommand("solve", "solve the profile; writes profile.csv, report.json");
  add_common(solve, flags);
  solve->callback([&] { command = wp::cmd_solve; });

  auto* verify = app.add_subcommand("verify", "run all residual checks; writes verify.json");
  add_common(verify, flags);
  verify->add_option("--inject-error", flags.inject, "scale u by this factor (negative control)");
  verify->callback([&] { command = wp::cmd_verify; });

  auto* sweep = app.add_subcommand("sweep", "height estimate over several H; writes sweep.csv");
  add_common(sweep, flags);
  sweep->add_option("--H-values", flags.H_values, "comma-separated H list")->delimiter(',');
  sweep->callback([&] { command = wp::cmd_sweep; });

  auto* mesh = app.add_subcommand("mesh", "triangulate the sphere; writes sphere.obj");
  add_common(mesh, flags);
  mesh->callback([&] { command = wp::cmd_mesh; });

  auto* curv = app.add_subcommand("curvature", "mean curvature of a grid graph; writes hfield.csv");
  add_common(curv, flags);
  curv->add_option("--input", flags.input, "CSV with columns rho,theta,u");
  curv->callback([&] { command = wp::cmd_curvature; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? wp::kOk : wp::kBadInput;
  }

  RunConfig cfg;
  try {
    cfg = resolve(flags);
  } catch (const warpcmc::InputError& e) {
    spdlog::error("bad input: {}", e.what());
    return wp::kBadInput;
  }
  return wp::run(command, cfg);
}
