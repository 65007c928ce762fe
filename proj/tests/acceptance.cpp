// Acceptance checks for the particle-mesh solver: each numbered check runs a
// full benchmark configuration (or a structural invariant suite) and prints
// one PASS/FAIL line. Usage: acceptance <1..8>.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "pmhdg/bench.hpp"
#include "pmhdg/condense.hpp"
#include "pmhdg/diagnostics.hpp"
#include "pmhdg/hdg.hpp"
#include "pmhdg/mesh.hpp"
#include "pmhdg/particles.hpp"
#include "pmhdg/projection.hpp"
#include "pmhdg/spaces.hpp"

using namespace pmhdg;

namespace {

constexpr double kPi = 3.14159265358979323846;

bool g_pass = true;

void check(bool ok, const char* fmt, ...) {
  std::printf("  %s ", ok ? "ok  " : "FAIL");
  va_list args;
  va_start(args, fmt);
  std::vprintf(fmt, args);
  va_end(args);
  std::printf("\n");
  std::fflush(stdout);
  if (!ok) g_pass = false;
}

/// err within a two-sided factor of the reference value.
bool within_factor(double err, double ref, double factor) {
  return err >= ref / factor && err <= ref * factor;
}

// ---------------------------------------------------------------------------
// 1. Rotating-bodies run on a fine disk: the accumulated global mass residual
//    and the running max of the cellwise residual norm stay at machine
//    precision through one and two revolutions.
// ---------------------------------------------------------------------------
void criterion_1() {
  BenchmarkConfig cfg = bench_config(BenchCase::RigidRotation, {});
  cfg.rings = 26;
  cfg.k = 1;
  cfg.l = 0;
  cfg.dt = 0.01;
  cfg.t_end = 2.0;
  cfg.output_every = 100;  // rows at t = 1 and t = 2
  const DiagnosticsReport rep = run_case(cfg);
  check(rep.cells >= 4000, "mesh has %d cells (need >= 4000)", rep.cells);

  int found = 0;
  for (const ReportRow& r : rep.rows) {
    if (std::abs(r.time - 1.0) > 1e-9 && std::abs(r.time - 2.0) > 1e-9) continue;
    ++found;
    check(std::abs(r.eps_mass_global) <= 1e-12,
          "t = %.1f: |global mass residual| = %.3e <= 1e-12", r.time,
          std::abs(r.eps_mass_global));
    check(r.eps_mass_local <= 1e-12, "t = %.1f: cellwise residual norm = %.3e <= 1e-12",
          r.time, r.eps_mass_local);
  }
  check(found == 2, "report rows at t = 1 and t = 2 (%d found)", found);
}

// ---------------------------------------------------------------------------
// 2. Rotating-hump convergence in the advective limit (kappa = 0) across the
//    two coarsest disk resolutions, plus the degraded mixed-regime rate of
//    the first-order multiplier space with diffusion on.
// ---------------------------------------------------------------------------
double hump_error(int k, int l, bool rotation, double kappa, int rings, double dt) {
  BenchmarkConfig cfg = bench_config(BenchCase::GaussianHump, {});
  cfg.k = k;
  cfg.l = l;
  cfg.rotation = rotation;
  cfg.kappa = kappa;
  cfg.rings = rings;
  cfg.dt = dt;
  cfg.t_end = 2.0;
  return run_case(cfg).final_row().err_field;
}

void criterion_2() {
  // quadratic elements, zero-degree multiplier, pure advection
  const double e1 = hump_error(2, 0, true, 0.0, 8, 0.08);
  const double e2 = hump_error(2, 0, true, 0.0, 16, 0.04);
  const double rate = std::log2(e1 / e2);
  check(within_factor(e1, 2.9e-3, 2.0), "k=2 coarse error %.3e within 2x of 2.9e-3", e1);
  check(within_factor(e2, 2.5e-4, 2.0), "k=2 fine error %.3e within 2x of 2.5e-4", e2);
  check(rate >= 2.8, "k=2 advective rate %.2f >= 2.8", rate);

  // linear elements: second order
  const double f1 = hump_error(1, 0, true, 0.0, 8, 0.08);
  const double f2 = hump_error(1, 0, true, 0.0, 16, 0.04);
  const double rate1 = std::log2(f1 / f2);
  check(std::abs(rate1 - 2.0) <= 0.3, "k=1 advective rate %.2f within 2.0 +- 0.3", rate1);

  // first-order multiplier with diffusion: rate degrades to ~1
  const double g1 = hump_error(2, 1, true, 0.01, 8, 0.08);
  const double g2 = hump_error(2, 1, true, 0.01, 16, 0.04);
  const double rate_l1 = std::log2(g1 / g2);
  check(rate_l1 <= 1.2, "l=1 mixed-regime rate %.2f <= 1.2", rate_l1);
}

// ---------------------------------------------------------------------------
// 3. Stationary hump, diffusion-dominated: third-order convergence for
//    quadratic elements.
// ---------------------------------------------------------------------------
void criterion_3() {
  const double e1 = hump_error(2, 0, false, 0.001, 8, 0.08);
  const double e2 = hump_error(2, 0, false, 0.001, 16, 0.04);
  const double rate = std::log2(e1 / e2);
  check(std::abs(rate - 3.0) <= 0.3, "diffusive-limit rate %.2f within 3.0 +- 0.3 (%.3e -> %.3e)",
        rate, e1, e2);
}

// ---------------------------------------------------------------------------
// 4. Step profile entering the unit square at four angles: exact global mass
//    balance; at 45 degrees (front aligned with mesh diagonals) the field is
//    exact away from the front; at the other angles any over/undershoot is
//    confined to cells touching the front or sharing a facet with one.
// ---------------------------------------------------------------------------
void criterion_4() {
  for (const double angle : {15.0, 30.0, 45.0, 60.0}) {
    BenchmarkConfig cfg = bench_config(BenchCase::SkewAdvection, {});
    cfg.angle_deg = angle;
    cfg.t_end = 2.0;
    const DiagnosticsReport rep = run_case(cfg);
    const ReportRow& last = rep.final_row();
    check(std::abs(last.eps_mass_global) <= 1e-12,
          "angle %2.0f: |global mass residual| = %.3e <= 1e-12", angle,
          std::abs(last.eps_mass_global));

    // signed distance-like function of the inflow characteristic through
    // (0, 0.2); the exact profile is 1 where s < 0
    const double al = angle * kPi / 180.0;
    const Vec2 d{std::cos(al), std::sin(al)};
    const auto s_of = [&](Vec2 x) { return d.x * (x.y - 0.2) - d.y * x.x; };
    const Triangulation& tri = rep.tri;
    const ReferenceBasis basis(rep.field.layout.degree);

    std::vector<char> on_front(tri.num_cells(), 0);
    for (int c = 0; c < tri.num_cells(); ++c) {
      double smin = 1e300, smax = -1e300;
      for (int lv = 0; lv < 3; ++lv) {
        const double s = s_of(tri.cell_vertex(c, lv));
        smin = std::min(smin, s);
        smax = std::max(smax, s);
      }
      if (smin <= 1e-9 && smax >= -1e-9) on_front[c] = 1;
    }

    int clear_cells = 0, offenders = 0, stray = 0;
    double worst_clear = 0.0;
    for (int c = 0; c < tri.num_cells(); ++c) {
      bool near_front = on_front[c];
      for (int lf = 0; lf < 3 && !near_front; ++lf) {
        const int nb = tri.cell_neighbors[c][lf];
        if (nb >= 0 && on_front[nb]) near_front = true;
      }
      for (int lv = 0; lv < 3; ++lv) {
        const std::array<double, 3> bary{lv == 0 ? 1.0 : 0.0, lv == 1 ? 1.0 : 0.0,
                                         lv == 2 ? 1.0 : 0.0};
        const double val = evaluate_scalar(rep.field, {c, bary}, basis);
        if (!on_front[c]) {
          // vertex values of cells off the front: compare with the step
          const double exact = s_of(tri.cell_vertex(c, lv)) < 0.0 ? 1.0 : 0.0;
          worst_clear = std::max(worst_clear, std::abs(val - exact));
          ++clear_cells;
        }
        if ((val < -1e-10 || val > 1.0 + 1e-10) && !near_front) {
          ++stray;
        } else if (val < -1e-10 || val > 1.0 + 1e-10) {
          ++offenders;
        }
      }
    }
    if (angle == 45.0) {
      check(worst_clear <= 1e-10,
            "angle 45: field exact away from the front (worst dev %.3e, %d samples)",
            worst_clear, clear_cells);
    }
    check(stray == 0,
          "angle %2.0f: over/undershoot confined to the front band (%d confined, %d stray)",
          angle, offenders, stray);
  }
}

// ---------------------------------------------------------------------------
// 5. Channel start-up flow at t = 125 on 64- and 256-cell meshes: velocity
//    errors and third-order velocity / second-order pressure rates.
// ---------------------------------------------------------------------------
void criterion_5() {
  const BenchmarkConfig cfg = bench_config(BenchCase::Poiseuille, {});
  const std::vector<ConvergenceRow> rows = convergence_study(cfg, 2);
  check(within_factor(rows[0].err_u, 3.9e-6, 3.0),
        "64-cell velocity error %.3e within 3x of 3.9e-6", rows[0].err_u);
  check(within_factor(rows[1].err_u, 4.3e-7, 3.0),
        "256-cell velocity error %.3e within 3x of 4.3e-7", rows[1].err_u);
  check(std::abs(rows[1].rate_u - 3.0) <= 0.4, "velocity rate %.2f within 3.0 +- 0.4",
        rows[1].rate_u);
  check(rows[1].rate_p >= 2.0, "pressure rate %.2f >= 2.0", rows[1].rate_p);
}

// ---------------------------------------------------------------------------
// 6. Unisolvency threshold: lattice seeding with fewer particles per cell
//    than quadratic cell basis functions must fail (or diverge); a
//    comfortably unisolvent count matches the converged error.
// ---------------------------------------------------------------------------
void criterion_6() {
  BenchmarkConfig cfg = bench_config(BenchCase::Poiseuille, {});
  cfg.nx = 16;
  cfg.ny = 8;
  cfg.dt = 0.1;
  cfg.seeding = SeedingConfig::Mode::Lattice;

  cfg.particles_per_cell = 4;  // fewer than the 6 quadratic basis functions
  bool starved_failed = false;
  std::string reason;
  try {
    const DiagnosticsReport rep = run_case(cfg);
    const double err = rep.final_row().err_field;
    starved_failed = !std::isfinite(err) || err > 1e-2;
    reason = "completed with error " + std::to_string(err);
  } catch (const std::exception& ex) {
    starved_failed = true;
    reason = std::string("threw: ") + ex.what();
  }
  check(starved_failed, "4 particles/cell fails (%s)", reason.c_str());

  cfg.particles_per_cell = 15;
  const DiagnosticsReport rep = run_case(cfg);
  const double err = rep.final_row().err_field;
  check(within_factor(err, 4.3e-7, 2.0),
        "15 particles/cell completes with velocity error %.3e within 2x of 4.3e-7", err);
}

// ---------------------------------------------------------------------------
// 7. Decaying vortex array: the constrained transfer conserves momentum to
//    machine precision where the plain least-squares transfer does not;
//    velocity errors and second-order refinement rate.
// ---------------------------------------------------------------------------
void criterion_7() {
  const auto tg_run = [](double re, bool l2_transfer) {
    BenchmarkConfig cfg = bench_config(BenchCase::TaylorGreen, {});
    cfg.re = re;
    cfg.l2_projection = l2_transfer;
    return run_case(cfg);
  };

  const struct {
    double re;
    bool l2;
    double ref_err;
  } runs[] = {{100.0, false, 6.5e-3},
              {1000.0, false, 7.6e-2},
              {100.0, true, 6.6e-3},
              {1000.0, true, 7.6e-2}};
  for (const auto& r : runs) {
    const DiagnosticsReport rep = tg_run(r.re, r.l2);
    const ReportRow& last = rep.final_row();
    const char* kind = r.l2 ? "least-squares" : "constrained";
    if (r.l2) {
      check(last.eps_momentum >= 1e-5,
            "Re %.0f %s transfer: momentum drift %.3e >= 1e-5", r.re, kind,
            last.eps_momentum);
    } else {
      check(last.eps_momentum <= 1e-10,
            "Re %.0f %s transfer: momentum drift %.3e <= 1e-10", r.re, kind,
            last.eps_momentum);
    }
    check(within_factor(last.err_field, r.ref_err, 3.0),
          "Re %.0f %s transfer: velocity error %.3e within 3x of %.1e", r.re, kind,
          last.err_field, r.ref_err);
  }

  const std::vector<ConvergenceRow> rows =
      convergence_study(bench_config(BenchCase::TaylorGreen, {}), 3);
  const double mean_rate = std::log2(rows[0].err_u / rows[2].err_u) / 2.0;
  check(std::abs(mean_rate - 2.0) <= 0.5,
        "mean velocity rate %.2f within 2.0 +- 0.5 (%.3e / %.3e / %.3e)", mean_rate,
        rows[0].err_u, rows[1].err_u, rows[2].err_u);
}

// ---------------------------------------------------------------------------
// 8. Structural invariants.
// ---------------------------------------------------------------------------

/// (a) Round trip: particle payloads sampling a degree <= k polynomial are
/// recovered exactly by the constrained transfer, with a vanishing multiplier.
void round_trip_trials() {
  const Triangulation tri =
      generate_rectangle(3, 3, {{0.0, 0.0}, {1.0, 1.0}}, Diagonal::Right);
  TimeScheme ts;
  ts.dt = 0.1;
  ts.multiplier_degree = 0;
  std::mt19937_64 eng(20240811);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);

  int failures = 0;
  double worst_state = 0.0, worst_lambda = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 1 + trial % 3;
    const DofLayout W = build_layout(tri, LayoutKind::CellDiscontinuous, k, 1);
    std::vector<double> c;
    for (int i = 0; i <= k; ++i)
      for (int j = 0; i + j <= k; ++j) c.push_back(coeff(eng));
    const auto poly = [&](Vec2 x) {
      double v = 0.0;
      int m = 0;
      for (int i = 0; i <= k; ++i)
        for (int j = 0; i + j <= k; ++j) v += c[m++] * std::pow(x.x, i) * std::pow(x.y, j);
      return v;
    };
    const ParticleSet set =
        seed(tri, {SeedingConfig::Mode::Lattice, 16, static_cast<std::uint64_t>(7000 + trial)}, poly,
             nullptr);
    const DiscreteField psi_star = project_function(tri, W, poly);
    const ProjectionResult res =
        constrained_project_scalar(tri, set, psi_star, {}, {}, ts);
    const double scale = std::max(1.0, psi_star.coeffs.lpNorm<Eigen::Infinity>());
    const double ds = (res.state.coeffs - psi_star.coeffs).lpNorm<Eigen::Infinity>() / scale;
    const double dl = res.multiplier.coeffs.lpNorm<Eigen::Infinity>();
    worst_state = std::max(worst_state, ds);
    worst_lambda = std::max(worst_lambda, dl);
    if (ds > 1e-12 || dl > 1e-12) ++failures;
  }
  check(failures == 0,
        "100 polynomial round trips exact (worst state dev %.3e, worst multiplier %.3e)",
        worst_state, worst_lambda);
}

/// (b) The condensation pipeline agrees with a dense monolithic solve of the
/// same block systems on small meshes, for all three condensed systems.
void condensation_oracle() {
  const Triangulation tri =
      generate_rectangle(2, 2, {{0.0, 0.0}, {1.0, 1.0}}, Diagonal::Right);  // 8 cells
  const auto compare = [](const char* what, const std::vector<LocalSystem>& locals,
                          const DirichletConstraints& cons, int nl, int nf) {
    CondensedSystem sys = condense(locals, nf, cons);
    const Eigen::VectorXd xg = solve_global(sys);
    const Eigen::VectorXd xl = back_substitute(sys, xg, nl);
    const auto [ol, og] = monolithic_oracle_solve(locals, nl, nf, cons);
    const double dev = std::max((xl - ol).lpNorm<Eigen::Infinity>(),
                                (xg - og).lpNorm<Eigen::Infinity>());
    check(dev <= 1e-9, "%s: condensed vs monolithic dev %.3e <= 1e-9 (%d+%d dofs)", what,
          dev, nl, nf);
  };

  // constrained particle-mesh transfer, both multiplier degrees
  const DofLayout W = build_layout(tri, LayoutKind::CellDiscontinuous, 2, 1);
  const auto payload = [](Vec2 x) { return std::sin(2.0 * x.x) * std::cos(x.y) + 0.3; };
  const ParticleSet set =
      seed(tri, {SeedingConfig::Mode::Lattice, 12, 5}, payload, nullptr);
  const DiscreteField psi_star = project_function(tri, W, payload);
  AdvectiveField a;
  a.analytic = [](Vec2 x) { return Vec2{0.4 - 0.2 * x.y, 0.3 * x.x + 0.1}; };
  ProjectionBC pbc;
  pbc.g = [](Vec2 x) { return std::cos(x.x + x.y); };
  for (const int l : {0, 1}) {
    TimeScheme ts;
    ts.dt = 0.05;
    ts.multiplier_degree = l;
    const ProjectionSystem ps =
        build_scalar_projection_system(tri, set, psi_star, a, pbc, ts);
    compare(l == 0 ? "transfer (constant multiplier)" : "transfer (linear multiplier)",
            ps.locals, ps.constraints, ps.num_local_dofs, ps.num_facet_dofs);
  }

  // diffusion step
  TimeScheme ts;
  ts.dt = 0.05;
  ProblemSpec dspec;
  dspec.kappa = 0.3;
  dspec.f = [](Vec2 x) { return x.x - x.y * x.y; };
  dspec.g = [](Vec2 x) { return std::sin(x.x) + 0.2 * x.y; };
  const HdgSystem ds = build_diffusion_system(tri, psi_star, dspec, ts);
  compare("diffusion", ds.locals, ds.constraints, ds.num_local_dofs, ds.num_facet_dofs);

  // viscous flow step
  const DofLayout V = build_layout(tri, LayoutKind::CellDiscontinuous, 2, 2);
  const DiscreteField u_star = project_function(tri, V, [](Vec2 x) {
    return Vec2{std::sin(x.y) + 0.2, -0.5 * std::cos(x.x)};
  });
  ProblemSpec sspec;
  sspec.nu = 0.1;
  sspec.f_vec = [](Vec2 x) { return Vec2{0.1 * x.y, -0.2 + x.x}; };
  sspec.g_vec = [](Vec2 x) { return Vec2{0.05 * x.y, 0.0}; };
  const HdgSystem ss = build_stokes_system(tri, u_star, sspec, ts);
  compare("viscous flow", ss.locals, ss.constraints, ss.num_local_dofs, ss.num_facet_dofs);
}

/// (c) Final velocities of full flow runs stay H(div)-conforming and
/// pointwise divergence-free.
void solenoidal_outputs() {
  BenchmarkConfig tg = bench_config(BenchCase::TaylorGreen, {});
  const DiagnosticsReport rtg = run_case(tg);
  check(divergence_infnorm(rtg.tri, rtg.velocity) <= 1e-10,
        "vortex run: max divergence %.3e <= 1e-10",
        divergence_infnorm(rtg.tri, rtg.velocity));
  check(normal_jump_infnorm(rtg.tri, rtg.velocity) <= 1e-10,
        "vortex run: max normal jump %.3e <= 1e-10",
        normal_jump_infnorm(rtg.tri, rtg.velocity));

  BenchmarkConfig ch = bench_config(BenchCase::Poiseuille, {});
  ch.t_end = 2.0;  // ten steps suffice for the structural check
  const DiagnosticsReport rch = run_case(ch);
  check(divergence_infnorm(rch.tri, rch.velocity) <= 1e-10,
        "channel run: max divergence %.3e <= 1e-10",
        divergence_infnorm(rch.tri, rch.velocity));
  check(normal_jump_infnorm(rch.tri, rch.velocity) <= 1e-10,
        "channel run: max normal jump %.3e <= 1e-10",
        normal_jump_infnorm(rch.tri, rch.velocity));
}

/// (d) With the constant multiplier space the assembled transfer matrices do
/// not depend on the time-integration parameter theta.
void theta_independence() {
  const Triangulation tri =
      generate_rectangle(2, 2, {{0.0, 0.0}, {1.0, 1.0}}, Diagonal::Right);
  const DofLayout W = build_layout(tri, LayoutKind::CellDiscontinuous, 2, 1);
  const auto payload = [](Vec2 x) { return std::exp(-x.norm2()) + x.x; };
  const ParticleSet set =
      seed(tri, {SeedingConfig::Mode::Lattice, 12, 9}, payload, nullptr);
  const DiscreteField psi_star = project_function(tri, W, payload);
  AdvectiveField a;
  a.analytic = [](Vec2 x) { return Vec2{0.7 - 0.1 * x.y, 0.2 * x.x + 0.4}; };
  ProjectionBC pbc;
  pbc.g = [](Vec2 x) { return x.x * x.y; };

  const auto build = [&](double theta) {
    TimeScheme ts;
    ts.dt = 0.05;
    ts.theta = theta;
    ts.multiplier_degree = 0;
    return build_scalar_projection_system(tri, set, psi_star, a, pbc, ts);
  };
  const ProjectionSystem sa = build(0.5);
  const ProjectionSystem sb = build(1.0);
  bool identical = sa.locals.size() == sb.locals.size();
  for (std::size_t c = 0; identical && c < sa.locals.size(); ++c) {
    const LocalSystem& la = sa.locals[c];
    const LocalSystem& lb = sb.locals[c];
    identical = (la.A_ll.array() == lb.A_ll.array()).all() &&
                (la.A_lg.array() == lb.A_lg.array()).all() &&
                (la.A_gl.array() == lb.A_gl.array()).all() &&
                (la.A_gg.array() == lb.A_gg.array()).all();
  }
  check(identical,
        "constant-multiplier transfer matrices are bitwise identical for theta 1/2 and 1");
}

/// (e) High-Reynolds vortex run develops a broadband spectrum with a cascade
/// slope in the expected band and a consistent Parseval sum.
void spectrum_check() {
  BenchmarkConfig cfg = bench_config(BenchCase::TaylorGreen, {});
  cfg.k = 1;
  cfg.nx = cfg.ny = 64;
  cfg.re = 1e4;
  cfg.dt = 0.05;
  cfg.t_end = 10.0;
  cfg.spectrum_n = 64;
  const DiagnosticsReport rep = run_case(cfg);
  check(rep.spectrum.parseval_error <= 0.01, "spectrum Parseval deviation %.3e <= 1%%",
        rep.spectrum.parseval_error);
  const double slope = spectrum_slope(rep.spectrum, 3.0, 16.0);
  check(slope >= -4.0 && slope <= -2.5, "cascade slope %.2f within [-4, -2.5]", slope);
}

void criterion_8() {
  round_trip_trials();
  condensation_oracle();
  solenoidal_outputs();
  theta_independence();
  spectrum_check();
}

const char* kNames[] = {
    "mass conservation at machine precision",
    "rotating-hump advective-limit convergence",
    "stationary-hump diffusive-limit convergence",
    "skew-advection front confinement and mass balance",
    "channel-flow convergence",
    "particle-count unisolvency threshold",
    "decaying-vortex momentum conservation and convergence",
    "structural invariants",
};

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s <criterion 1..8>\n", argv[0]);
    return 2;
  }
  const int n = std::atoi(argv[1]);
  if (n < 1 || n > 8) {
    std::fprintf(stderr, "usage: %s <criterion 1..8>\n", argv[0]);
    return 2;
  }
  std::printf("criterion %d: %s\n", n, kNames[n - 1]);
  const auto t0 = std::chrono::steady_clock::now();
  switch (n) {
    case 1: criterion_1(); break;
    case 2: criterion_2(); break;
    case 3: criterion_3(); break;
    case 4: criterion_4(); break;
    case 5: criterion_5(); break;
    case 6: criterion_6(); break;
    case 7: criterion_7(); break;
    case 8: criterion_8(); break;
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("criterion %d: %s (%.1f s)\n", n, g_pass ? "PASS" : "FAIL", wall);
  return g_pass ? 0 : 1;
}
