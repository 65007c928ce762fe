#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "pmhdg/bench.hpp"

namespace {

pmhdg::BenchmarkConfig load_config(const std::string& case_name,
                                   const std::string& config_path) {
  pmhdg::Config cfg;
  if (!config_path.empty()) cfg = pmhdg::parse_config_file(config_path);
  return pmhdg::bench_config(pmhdg::parse_case(case_name), cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"particle-mesh HDG benchmark driver"};
  app.require_subcommand(1);

  std::string case_name, config_path, out_dir;
  long long seed = -1;
  int levels = 3;

  CLI::App* run = app.add_subcommand("run", "run one benchmark case");
  run->add_option("case", case_name,
                  "gaussian-hump | rigid-rotation | skew-advection | poiseuille | "
                  "taylor-green")
      ->required();
  run->add_option("--config", config_path, "configuration file");
  run->add_option("--out", out_dir, "output directory (report.csv, VTK, particles)");
  run->add_option("--seed", seed, "rng seed override");

  CLI::App* conv = app.add_subcommand("convergence", "mesh/time refinement study");
  conv->add_option("case", case_name, "gaussian-hump | poiseuille | taylor-green")
      ->required();
  conv->add_option("--config", config_path, "configuration file");
  conv->add_option("--levels", levels, "number of refinement levels")
      ->check(CLI::PositiveNumber);
  conv->add_option("--out", out_dir, "output directory for convergence.csv");

  CLI11_PARSE(app, argc, argv);

  try {
    pmhdg::BenchmarkConfig cfg = load_config(case_name, config_path);
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (!out_dir.empty()) cfg.out_dir = out_dir;

    if (run->parsed()) {
      const pmhdg::DiagnosticsReport report = pmhdg::run_case(cfg);
      const pmhdg::ReportRow& last = report.final_row();
      std::printf("case=%s cells=%d h_max=%.3e cfl=%.2f\n",
                  pmhdg::case_name(cfg.bench_case).c_str(), report.cells, report.h_max,
                  report.cfl);
      std::printf(
          "t=%.6g err_u=%.6e err_p=%.6e eps_mass_global=%.3e eps_mass_local=%.3e "
          "eps_momentum=%.3e particles=%d\n",
          last.time, last.err_field, last.err_p, last.eps_mass_global,
          last.eps_mass_local, last.eps_momentum, last.particles);
    } else {
      cfg.out_dir.clear();  // per-level file output is not part of a study
      const auto rows = pmhdg::convergence_study(cfg, levels);
      std::printf("cells,h_max,dt,err_u,rate_u,err_p,rate_p\n");
      for (const auto& r : rows) {
        std::printf("%d,%.6e,%.6g,%.6e,%.2f,%.6e,%.2f\n", r.cells, r.h_max, r.dt,
                    r.err_u, r.rate_u, r.err_p, r.rate_p);
      }
      if (!out_dir.empty()) {
        pmhdg::write_convergence_csv(out_dir + "/convergence.csv", rows);
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
