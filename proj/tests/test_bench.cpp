#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "pmhdg/bench.hpp"
#include "pmhdg/diagnostics.hpp"

using namespace pmhdg;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Crank-Nicolson solution of u_t = nu u_yy + fx on [-d, d], u(+-d) = 0,
// u(y, 0) = 0, on a fine uniform grid (tridiagonal Thomas solve per step).
std::vector<double> heat_oracle(const std::vector<double>& y_nodes, double t,
                                double d, double nu, double fx) {
  const int n = 801;  // interior nodes
  const double dy = 2.0 * d / (n + 1);
  const int nsteps = 2000;
  const double dt = t / nsteps;
  const double r = 0.5 * nu * dt / (dy * dy);

  std::vector<double> u(n, 0.0), rhs(n), c_prime(n), d_prime(n);
  for (int s = 0; s < nsteps; ++s) {
    for (int i = 0; i < n; ++i) {
      const double um = i > 0 ? u[i - 1] : 0.0;
      const double up = i < n - 1 ? u[i + 1] : 0.0;
      rhs[i] = u[i] + r * (um - 2.0 * u[i] + up) + dt * fx;
    }
    // Thomas algorithm for (1 + 2r) on the diagonal, -r off-diagonal
    const double b = 1.0 + 2.0 * r, a = -r, c = -r;
    c_prime[0] = c / b;
    d_prime[0] = rhs[0] / b;
    for (int i = 1; i < n; ++i) {
      const double m = b - a * c_prime[i - 1];
      c_prime[i] = c / m;
      d_prime[i] = (rhs[i] - a * d_prime[i - 1]) / m;
    }
    u[n - 1] = d_prime[n - 1];
    for (int i = n - 2; i >= 0; --i) u[i] = d_prime[i] - c_prime[i] * u[i + 1];
  }

  // linear interpolation; interior node j sits at y = -d + (j+1)*dy and the
  // walls carry the value 0
  std::vector<double> out;
  for (double y : y_nodes) {
    const double jf = (y + d) / dy - 1.0;
    const int j0 = static_cast<int>(std::floor(jf));
    const double w = jf - j0;
    auto at = [&](int j) { return j >= 0 && j < n ? u[j] : 0.0; };
    out.push_back(at(j0) * (1.0 - w) + at(j0 + 1) * w);
  }
  return out;
}

}  // namespace

TEST_CASE("case names round trip") {
  for (const BenchCase c : {BenchCase::GaussianHump, BenchCase::RigidRotation,
                            BenchCase::SkewAdvection, BenchCase::Poiseuille,
                            BenchCase::TaylorGreen}) {
    CHECK(parse_case(case_name(c)) == c);
  }
  CHECK_THROWS(parse_case("vortex-street"));
}

TEST_CASE("config parsing with sections and fallbacks") {
  const Config cfg = parse_config_text(
      "dt = 0.5        # global\n"
      "seed = 7\n"
      "[taylor-green]\n"
      "dt = 0.1\n"
      "re = 1000\n");
  CHECK(cfg.get_double("taylor-green", "dt", 0.0) == 0.1);
  CHECK(cfg.get_double("poiseuille", "dt", 0.0) == 0.5);   // global fallback
  CHECK(cfg.get_int("gaussian-hump", "seed", 0) == 7);
  CHECK(cfg.get_double("taylor-green", "re", 0.0) == 1000.0);
  CHECK(cfg.get_double("taylor-green", "nu", -1.0) == -1.0);  // explicit fallback

  BenchmarkConfig bc = bench_config(BenchCase::TaylorGreen, cfg);
  CHECK(bc.dt == 0.1);
  CHECK(bc.re == 1000.0);
  CHECK(bc.seed == 7);
  BenchmarkConfig hump = bench_config(BenchCase::GaussianHump, cfg);
  CHECK(hump.dt == 0.5);  // global key reaches every case
}

TEST_CASE("channel start-up profile matches a finite-difference heat solve") {
  const double d = 0.25, nu = 1e-3, U = 0.4;
  const double fx = 2.0 * nu * U / (d * d);
  std::vector<double> y;
  for (int i = 0; i <= 20; ++i) y.push_back(-d + 2.0 * d * i / 20.0);

  for (const double t : {5.0, 25.0, 125.0}) {
    const std::vector<double> oracle = heat_oracle(y, t, d, nu, fx);
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double series = channel_transient_velocity(y[i], t, d, nu, fx);
      CHECK(std::abs(series - oracle[i]) < 2e-5 * U);
    }
  }
  // walls and startup
  CHECK(std::abs(channel_transient_velocity(d, 10.0, d, nu, fx)) < 1e-12);
  CHECK(std::abs(channel_transient_velocity(0.1, 0.0, d, nu, fx)) < 1e-10);
  // late time approaches the steady parabola
  const double late = channel_transient_velocity(0.0, 1e5, d, nu, fx);
  CHECK(late == doctest::Approx(U).epsilon(1e-12));
}

TEST_CASE("energy spectrum of single and double modes") {
  const Triangulation tri = generate_rectangle(
      16, 16, {{-1.0, -1.0}, {1.0, 1.0}}, Diagonal::Right, true, true,
      BoundaryMarker::Periodic);
  const DofLayout V = build_layout(tri, LayoutKind::CellDiscontinuous, 3, 2);
  const double k = 2.0 * kPi / 2.0;

  // monochromatic vortex mode: all energy within one bin of its wavenumber
  const DiscreteField mono = project_function(tri, V, [&](Vec2 x) {
    return Vec2{-std::cos(k * x.x) * std::sin(k * x.y),
                std::sin(k * x.x) * std::cos(k * x.y)};
  });
  const Spectrum s1 = energy_spectrum(tri, mono, 64);
  CHECK(s1.parseval_error < 0.01);
  int peak = 0;
  double total = 0.0;
  for (std::size_t i = 0; i < s1.energy.size(); ++i) {
    total += s1.energy[i];
    if (s1.energy[i] > s1.energy[peak]) peak = static_cast<int>(i);
  }
  double near_peak = 0.0;
  for (int i = std::max(0, peak - 1);
       i <= std::min<int>(s1.energy.size() - 1, peak + 1); ++i) {
    near_peak += s1.energy[i];
  }
  CHECK(near_peak / total > 0.999);
  CHECK(std::abs(s1.wavenumber[peak] - std::sqrt(2.0)) <= 1.0);

  // two well-separated modes with amplitudes 1 and 2: bin energies 1 : 4
  const DiscreteField duo = project_function(tri, V, [&](Vec2 x) {
    return Vec2{std::sin(k * x.y) + 2.0 * std::sin(3.0 * k * x.y), 0.0};
  });
  const Spectrum s2 = energy_spectrum(tri, duo, 64);
  CHECK(s2.parseval_error < 0.01);
  double e1 = 0.0, e3 = 0.0;
  for (std::size_t i = 0; i < s2.energy.size(); ++i) {
    if (std::abs(s2.wavenumber[i] - 1.0) < 0.5) e1 += s2.energy[i];
    if (std::abs(s2.wavenumber[i] - 3.0) < 0.5) e3 += s2.energy[i];
  }
  CHECK(e3 / e1 == doctest::Approx(4.0).epsilon(0.02));

  // spectra are only defined on bi-periodic meshes
  const Triangulation walls =
      generate_rectangle(4, 4, {{0.0, 0.0}, {1.0, 1.0}}, Diagonal::Right);
  CHECK_THROWS(energy_spectrum(walls, DiscreteField::zero(V), 16));
}

TEST_CASE("csv report format and empty-report header") {
  const auto dir = fresh_dir("pmhdg_test_csv");
  DiagnosticsReport empty;
  write_report_csv((dir / "empty.csv").string(), empty);
  CHECK(slurp(dir / "empty.csv") ==
        "time,err_u,err_p,eps_mass_global,eps_mass_local,eps_momentum,particles\n");
  std::filesystem::remove_all(dir);
}

TEST_CASE("short advection-diffusion run: outputs, determinism, conservation") {
  BenchmarkConfig cfg = bench_config(BenchCase::GaussianHump, {});
  cfg.rings = 4;
  cfg.kappa = 0.01;
  cfg.dt = 0.08;
  cfg.t_end = 0.4;
  cfg.output_every = 1;
  const auto dir1 = fresh_dir("pmhdg_test_run1");
  const auto dir2 = fresh_dir("pmhdg_test_run2");

  cfg.out_dir = dir1.string();
  const DiagnosticsReport rep1 = run_case(cfg);
  cfg.out_dir = dir2.string();
  const DiagnosticsReport rep2 = run_case(cfg);

  // byte-identical outputs for a fixed seed
  CHECK(slurp(dir1 / "report.csv") == slurp(dir2 / "report.csv"));
  CHECK(slurp(dir1 / "particles.txt") == slurp(dir2 / "particles.txt"));

  // every output time satisfies the conservation contract
  REQUIRE(rep1.rows.size() == 6u);  // t = 0 and five steps
  for (const ReportRow& r : rep1.rows) {
    CHECK(std::abs(r.eps_mass_global) < 1e-12);
    CHECK(r.eps_mass_local < 1e-12);
  }
  CHECK(rep1.final_row().err_field < 0.05);
  CHECK(rep1.cells == 6 * 4 * 4);

  // one VTK snapshot with one cell row per mesh cell
  const std::string vtk = slurp(dir1 / "fields_final.vtk");
  std::istringstream in(vtk);
  std::string line;
  int cells = -1;
  while (std::getline(in, line)) {
    if (line.rfind("CELLS ", 0) == 0) {
      std::istringstream ls(line.substr(6));
      ls >> cells;
    }
  }
  CHECK(cells == rep1.cells);

  std::filesystem::remove_all(dir1);
  std::filesystem::remove_all(dir2);
}

TEST_CASE("convergence study shape and csv") {
  BenchmarkConfig cfg = bench_config(BenchCase::GaussianHump, {});
  cfg.rings = 4;
  cfg.kappa = 0.0;
  cfg.k = 2;
  cfg.dt = 0.1;
  cfg.t_end = 0.2;
  const auto rows = convergence_study(cfg, 2);
  REQUIRE(rows.size() == 2u);
  CHECK(rows[0].cells == 6 * 4 * 4);
  CHECK(rows[1].cells == 6 * 8 * 8);
  CHECK(rows[1].dt == doctest::Approx(0.05));
  CHECK(rows[0].rate_u == 0.0);
  CHECK(rows[1].rate_u > 0.0);

  const auto dir = fresh_dir("pmhdg_test_conv");
  write_convergence_csv((dir / "convergence.csv").string(), rows);
  const std::string csv = slurp(dir / "convergence.csv");
  CHECK(csv.rfind("cells,h_max,dt,err_u,rate_u,err_p,rate_p\n", 0) == 0);
  std::filesystem::remove_all(dir);

  BenchmarkConfig bad = bench_config(BenchCase::RigidRotation, {});
  CHECK_THROWS(convergence_study(bad, 2));
}
