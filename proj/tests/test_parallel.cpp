#include <cmath>

#include "doctest.h"
#include "pmhdg/hdg.hpp"
#include "pmhdg/mesh.hpp"
#include "pmhdg/parallel.hpp"
#include "pmhdg/particles.hpp"
#include "pmhdg/projection.hpp"
#include "pmhdg/spaces.hpp"

using namespace pmhdg;

namespace {

// Restore the execution mode even when a CHECK throws.
struct ModeGuard {
  ExecMode saved = default_exec_mode();
  ~ModeGuard() { default_exec_mode() = saved; }
};

}  // namespace

TEST_CASE("serial and threaded kernels produce identical results") {
  ModeGuard guard;
  const Triangulation tri = generate_rectangle(
      12, 12, {{-1.0, -1.0}, {1.0, 1.0}}, Diagonal::Right, true, true,
      BoundaryMarker::Periodic);
  const DofLayout W = build_layout(tri, LayoutKind::CellDiscontinuous, 2, 1);
  auto init = [](Vec2 x) { return std::cos(x.x) * std::sin(2.0 * x.y); };
  const ParticleSet set = seed(tri, {SeedingConfig::Mode::Random, 20, 99}, init, nullptr);

  AdvectiveField adv;
  adv.analytic = [](Vec2 x) { return Vec2{-x.y, x.x}; };
  ProjectionBC bc;
  TimeScheme ts;
  ts.dt = 0.01;
  ProblemSpec spec;
  spec.kappa = 0.02;
  spec.g = [](Vec2) { return 0.0; };

  auto run_all = [&] {
    struct Out {
      ParticleSet advected;
      DiscreteField fit;
      DiscreteField projected;
      DiscreteField diffused;
    } out{set, {}, {}, {}};
    advect_prescribed_rk3(out.advected, tri, [](Vec2 x, double) { return Vec2{-x.y, x.x}; },
                          0.0, ts.dt);
    out.fit = l2_project(tri, set, W);
    out.projected = constrained_project_scalar(tri, set, out.fit, adv, bc, ts).state;
    out.diffused = diffusion_step(tri, out.projected, spec, ts).first;
    return out;
  };

  default_exec_mode() = ExecMode::Serial;
  const auto serial = run_all();
  default_exec_mode() = ExecMode::OpenMP;
  const auto threaded = run_all();

  for (int p = 0; p < serial.advected.size(); ++p) {
    CHECK(serial.advected.x[p].x == threaded.advected.x[p].x);
    CHECK(serial.advected.x[p].y == threaded.advected.x[p].y);
    CHECK(serial.advected.host[p] == threaded.advected.host[p]);
  }
  // cellwise assembly writes disjoint blocks, so the kernels agree bitwise;
  // the shared sparse factorization introduces no thread dependence either
  CHECK((serial.fit.coeffs - threaded.fit.coeffs).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((serial.projected.coeffs - threaded.projected.coeffs).lpNorm<Eigen::Infinity>() ==
        0.0);
  CHECK((serial.diffused.coeffs - threaded.diffused.coeffs).lpNorm<Eigen::Infinity>() ==
        0.0);
}

TEST_CASE("parallel_for covers every index exactly once") {
  ModeGuard guard;
  for (const ExecMode mode : {ExecMode::Serial, ExecMode::OpenMP}) {
    std::vector<int> hits(10007, 0);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; }, mode);
    for (int h : hits) CHECK(h == 1);
  }
}
