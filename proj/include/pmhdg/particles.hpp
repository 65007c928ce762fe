#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "pmhdg/mesh.hpp"
#include "pmhdg/spaces.hpp"

namespace pmhdg {

/// Lagrangian particle set. Payload arrays are either empty or sized to the
/// particle count. `x_old` and `host_old` hold the state at the start of the
/// current step; the mesh-particle increment update needs both time levels.
struct ParticleSet {
  std::vector<Vec2> x;
  std::vector<Vec2> x_old;
  std::vector<double> psi;  // scalar payload
  std::vector<Vec2> v;      // specific momentum payload
  std::vector<int> host;
  std::vector<int> host_old;
  std::vector<char> alive;
  std::uint64_t rng_seed = 0;  // kept for reproducible inflow insertion

  int size() const { return static_cast<int>(x.size()); }
  bool has_scalar() const { return !psi.empty(); }
  bool has_vector() const { return !v.empty(); }
  int count_alive() const;
  /// Alive particles per cell.
  std::vector<int> per_cell_counts(const Triangulation& tri) const;
};

struct SeedingConfig {
  enum class Mode { Random, Lattice };
  Mode mode = Mode::Random;
  int target_per_cell = 1;
  std::uint64_t rng_seed = 0;
};

using ScalarFn = std::function<double(Vec2)>;
using VectorFn = std::function<Vec2(Vec2)>;

/// Random mode: target_per_cell * num_cells particles, uniform over the
/// domain (area-weighted cell choice, uniform point in the cell). Lattice
/// mode: exactly target_per_cell particles per cell on a fixed sub-lattice.
ParticleSet seed(const Triangulation& tri, const SeedingConfig& cfg,
                 const ScalarFn& init_scalar = nullptr,
                 const VectorFn& init_vector = nullptr);

/// Barycentric sub-lattice used by Lattice seeding: the first n points of the
/// smallest uniform lattice holding at least n interior points.
std::vector<std::array<double, 3>> lattice_points(int n);

/// Re-find host cells (walk from previous host, periodic wrap applied).
/// Particles outside a non-periodic domain are marked dead; returns how many.
int relocate(ParticleSet& set, const Triangulation& tri);

/// Three-stage SSP Runge-Kutta step through a prescribed velocity field.
/// Payloads are untouched; x_old keeps the pre-step position.
void advect_prescribed_rk3(ParticleSet& set, const Triangulation& tri,
                           const std::function<Vec2(Vec2, double)>& a, double t_n,
                           double dt);

/// Step through the Adams-Bashforth extrapolation 1.5*u_n - 0.5*u_nm1 of the
/// mesh velocity, integrated with one midpoint stage so the trajectory stays
/// second order. Evaluation always uses the polynomial of the point's host
/// cell (the cell fields are discontinuous tangentially across facets).
/// first_step uses u_n alone.
void advect_mesh_ab2(ParticleSet& set, const Triangulation& tri,
                     const DiscreteField& u_n, const DiscreteField& u_nm1, double dt,
                     bool first_step);

/// Top up inflow-adjacent cells (cells with a DirichletInflowOnly facet) to
/// target_per_cell with particles at random positions, payloads set from the
/// boundary data; dead particles are compacted out. `step` offsets the rng
/// stream so runs are reproducible.
void manage_boundary(ParticleSet& set, const Triangulation& tri,
                     const ScalarFn& inflow_scalar, const VectorFn& inflow_vector,
                     int target_per_cell, int step);

/// Swap-remove all dead particles.
void compact(ParticleSet& set);

/// One particle per line: "x y [psi] [vx vy]", with a header naming columns.
void write_particles(std::ostream& out, const ParticleSet& set);

}  // namespace pmhdg
