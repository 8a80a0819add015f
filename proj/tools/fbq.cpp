#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "fbq/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Goodput-maximizing quantized feedback schemes for finite-blocklength links"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int jobs = 0;
  std::uint64_t seed = 0;
  bool paper_exact = false;
  bool timings = false;
  bool has_seed = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "configuration file (key = value sections)")
        ->required();
    sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    sub->add_option("--jobs", jobs, "worker threads for the sweep (overrides run.jobs)");
    sub->add_option("--seed", seed, "random seed (overrides run.seed)")
        ->each([&](const std::string&) { has_seed = true; });
    sub->add_flag("--paper-exact", paper_exact,
                  "use the update/allocation rules exactly as printed");
    sub->add_flag("--timings", timings, "fill the wall_time_ms column (non-reproducible)");
  };

  CLI::App* c_curves = app.add_subcommand("curves", "error-probability and goodput curves");
  CLI::App* c_opt = app.add_subcommand("optimize", "unconstrained schemes plus baselines");
  CLI::App* c_con =
      app.add_subcommand("optimize-constrained", "schemes under a total error budget");
  CLI::App* c_val = app.add_subcommand("validate", "cross-check against grid or simulation");
  for (CLI::App* sub : {c_curves, c_opt, c_con, c_val}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    fbq::ExperimentConfig cfg = fbq::load_config(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (jobs > 0) cfg.jobs = jobs;
    if (has_seed) cfg.seed = seed;
    if (paper_exact) cfg.paper_exact = true;
    if (timings) cfg.timings = true;
    cfg.validate();

    if (c_curves->parsed()) return fbq::cmd_curves(cfg);
    if (c_opt->parsed()) return fbq::cmd_optimize(cfg);
    if (c_con->parsed()) return fbq::cmd_optimize_constrained(cfg);
    return fbq::cmd_validate(cfg);
  } catch (const fbq::config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
