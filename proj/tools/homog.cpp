#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "homog/config.hpp"
#include "homog/errors.hpp"
#include "homog/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"numerical homogenization of quasilinear level-set equations in periodic media"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  int jobs = 1;

  const char* names[] = {"effective", "limits",   "sweep",   "front",
                         "speed2d",   "obstacle", "fourier", "invariant"};
  const char* blurbs[] = {
      "effective tensors over a direction list",
      "directional limiting tensors for a list of transversals",
      "approach-sequence sweep toward an irrational direction",
      "front speed versus epsilon",
      "plane speed lambda_e(alpha) versus alpha",
      "critical mu versus the cell-solver value",
      "diophantine check and Fourier corrector residual",
      "invariant measure densities and the SDE cross-check",
  };
  for (int i = 0; i < 8; ++i) {
    CLI::App* sub = app.add_subcommand(names[i], blurbs[i]);
    sub->add_option("--config", config_path, "config file path")->required();
    sub->add_option("--jobs", jobs, "parallel worker count");
    sub->add_option("--out", out_dir, "output directory");
  }

  CLI11_PARSE(app, argc, argv);

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    const homog::Config cfg = homog::Config::parse_file(config_path);
    return homog::run_subcommand(sub, cfg, jobs, out_dir);
  } catch (const homog::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
