// Timing comparison between the serial reference kernels and their OpenMP
// counterparts: particle advection, cellwise least-squares projection, the
// constrained projection pipeline and one diffusion step.

#include <chrono>
#include <cstdio>
#include <functional>

#include "pmhdg/bench.hpp"
#include "pmhdg/hdg.hpp"
#include "pmhdg/mesh.hpp"
#include "pmhdg/parallel.hpp"
#include "pmhdg/particles.hpp"
#include "pmhdg/projection.hpp"

using namespace pmhdg;

namespace {

double time_best_of(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

void report(const char* name, double serial, double openmp) {
  std::printf("%-28s serial %8.2f ms   openmp %8.2f ms   speedup %5.2fx\n", name,
              1e3 * serial, 1e3 * openmp, serial / openmp);
}

}  // namespace

int main() {
  const Triangulation tri =
      generate_rectangle(48, 48, {{-1.0, -1.0}, {1.0, 1.0}}, Diagonal::Right, true, true,
                         BoundaryMarker::Periodic);
  const DofLayout W = build_layout(tri, LayoutKind::CellDiscontinuous, 2, 1);
  const auto a = [](Vec2 x, double) { return Vec2{-x.y, x.x}; };
  const auto init = [](Vec2 x) { return std::cos(x.x) * std::sin(x.y); };
  ParticleSet set = seed(tri, {SeedingConfig::Mode::Random, 30, 7}, init, nullptr);

  TimeScheme ts;
  ts.dt = 0.01;
  AdvectiveField adv;
  adv.analytic = [](Vec2 x) { return Vec2{-x.y, x.x}; };
  ProjectionBC pbc;
  ProblemSpec spec;
  spec.kappa = 0.01;
  spec.g = [](Vec2) { return 0.0; };

  std::printf("mesh: %d cells, %d particles, degree 2\n", tri.num_cells(),
              set.count_alive());
#ifdef PMHDG_HAVE_OPENMP
  std::printf("openmp threads: %d\n\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP: both columns run the serial kernels\n\n");
#endif

  struct Kernel {
    const char* name;
    std::function<void()> fn;
  };
  DiscreteField state = l2_project(tri, set, W);
  const Kernel kernels[] = {
      {"particle advection (rk3)",
       [&] {
         ParticleSet copy = set;
         advect_prescribed_rk3(copy, tri, a, 0.0, ts.dt);
       }},
      {"least-squares projection", [&] { (void)l2_project(tri, set, W); }},
      {"constrained projection",
       [&] { (void)constrained_project_scalar(tri, set, state, adv, pbc, ts); }},
      {"diffusion step", [&] { (void)diffusion_step(tri, state, spec, ts); }},
  };

  for (const Kernel& k : kernels) {
    default_exec_mode() = ExecMode::Serial;
    const double t_serial = time_best_of(3, k.fn);
    default_exec_mode() = ExecMode::OpenMP;
    const double t_openmp = time_best_of(3, k.fn);
    report(k.name, t_serial, t_openmp);
  }
  default_exec_mode() = ExecMode::OpenMP;
  return 0;
}
