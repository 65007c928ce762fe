#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pmhdg/diagnostics.hpp"
#include "pmhdg/hdg.hpp"
#include "pmhdg/io.hpp"
#include "pmhdg/particles.hpp"
#include "pmhdg/projection.hpp"

namespace pmhdg {

enum class BenchCase {
  GaussianHump,    // rotating (or stationary) Gaussian pulse on a disk
  RigidRotation,   // cone + slotted disk + hump, pure advection on a disk
  SkewAdvection,   // step function entering a unit square at an angle
  Poiseuille,      // body-force driven channel flow, periodic in x
  TaylorGreen,     // decaying vortex array on a bi-periodic square
};

BenchCase parse_case(const std::string& name);
std::string case_name(BenchCase c);

struct BenchmarkConfig {
  BenchCase bench_case = BenchCase::GaussianHump;
  int k = 1;
  int l = 0;
  double theta = 0.5;
  double theta_L = 0.5;
  double beta = 1e-6;
  double alpha = 0.0;  // 0: solver default
  double dt = 0.02;
  double t_end = 2.0;
  int particles_per_cell = 30;
  SeedingConfig::Mode seeding = SeedingConfig::Mode::Random;
  std::uint64_t seed = 42;

  int rings = 8;           // disk cases
  int nx = 8, ny = 8;      // rectangle cases

  double kappa = 0.0;      // GaussianHump
  bool rotation = true;    // GaussianHump: rotating vs a = 0
  double angle_deg = 45.0; // SkewAdvection
  double nu = 1e-3;        // flow cases
  double re = 0.0;         // if > 0, overrides nu (flow cases)
  double u_amp = 1.0;      // TaylorGreen
  double wave_lx = 2.0, wave_ly = 2.0;
  bool l2_projection = false;  // TaylorGreen Case 3: unconstrained transfer

  std::string out_dir;     // empty: no file output
  int output_every = 0;    // extra report rows every m steps (0: start/end only)
  int vtk_every = 0;       // field snapshots every m steps (0: none)
  int spectrum_n = 0;      // TaylorGreen: spectrum sample grid (0: skip)
};

/// Defaults for a case, overridden by the [case-name] section (global keys
/// apply to every case).
BenchmarkConfig bench_config(BenchCase c, const Config& cfg);

struct ReportRow {
  double time = 0.0;
  double err_field = 0.0;        // L2 error of the primary field
  double err_p = 0.0;            // pressure L2 error (flow cases)
  double eps_mass_global = 0.0;  // accumulated flux-corrected mass residual
  double eps_mass_local = 0.0;   // running max of the cellwise residual norm
  double eps_momentum = 0.0;     // |integral(u) - integral(u_0)|
  int particles = 0;
  int min_per_cell = 0;
  double mean_per_cell = 0.0;
  double wall_seconds = 0.0;     // cumulative; never written to CSV
};

struct DiagnosticsReport {
  std::vector<ReportRow> rows;
  int cells = 0;
  double h_min = 0.0, h_max = 0.0;
  double cfl = 0.0;           // max|u| * dt / h_min, reported only
  double initial_mass = 0.0;  // integral of the initial scalar field
  Spectrum spectrum;          // filled for TaylorGreen when spectrum_n > 0

  // final state, kept so callers can run their own diagnostics
  Triangulation tri;
  DiscreteField field;     // scalar cases
  DiscreteField velocity;  // flow cases
  DiscreteField pressure;  // flow cases

  const ReportRow& final_row() const { return rows.back(); }
};

/// Full operator-splitting run of one benchmark: particle advection ->
/// constrained projection -> Eulerian step -> mesh-particle update, with
/// diagnostics rows at the configured cadence. Deterministic for a fixed
/// seed. Writes CSV/VTK/particle dumps when out_dir is set.
DiagnosticsReport run_case(const BenchmarkConfig& cfg);

void write_report_csv(const std::string& path, const DiagnosticsReport& report);

struct ConvergenceRow {
  int cells = 0;
  double h_max = 0.0;
  double dt = 0.0;
  double err_u = 0.0;
  double rate_u = 0.0;  // 0 on the coarsest level
  double err_p = 0.0;
  double rate_p = 0.0;
};

/// Refinement study: level i halves dt and doubles the mesh resolution of the
/// base config. Supported for GaussianHump, Poiseuille and TaylorGreen.
std::vector<ConvergenceRow> convergence_study(const BenchmarkConfig& base, int levels);

void write_convergence_csv(const std::string& path,
                           const std::vector<ConvergenceRow>& rows);

/// Start-up channel-flow profile: u_t = nu u_yy + fx on [-d, d] with no-slip
/// walls and u(y, 0) = 0 (steady parabola minus a cosine relaxation series).
/// This is the error reference of the channel benchmark.
double channel_transient_velocity(double y, double t, double d, double nu, double fx);

}  // namespace pmhdg
