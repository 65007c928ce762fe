#include "pmhdg/particles.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "pmhdg/parallel.hpp"
#include "pmhdg/rng.hpp"

namespace pmhdg {

int ParticleSet::count_alive() const {
  int n = 0;
  for (char a : alive) n += (a != 0);
  return n;
}

std::vector<int> ParticleSet::per_cell_counts(const Triangulation& tri) const {
  std::vector<int> counts(tri.num_cells(), 0);
  for (int p = 0; p < size(); ++p) {
    if (alive[p]) ++counts[host[p]];
  }
  return counts;
}

std::vector<std::array<double, 3>> lattice_points(int n) {
  int m = 0;
  while ((m + 1) * (m + 2) / 2 < n) ++m;
  std::vector<std::array<double, 3>> pts;
  for (int i = 0; i <= m && static_cast<int>(pts.size()) < n; ++i) {
    for (int j = 0; i + j <= m && static_cast<int>(pts.size()) < n; ++j) {
      const double b1 = (i + 1.0 / 3.0) / (m + 1);
      const double b2 = (j + 1.0 / 3.0) / (m + 1);
      pts.push_back({1.0 - b1 - b2, b1, b2});
    }
  }
  return pts;
}

namespace {

Vec2 from_barycentric(const Triangulation& tri, int cell,
                      const std::array<double, 3>& b) {
  return tri.cell_vertex(cell, 0) * b[0] + tri.cell_vertex(cell, 1) * b[1] +
         tri.cell_vertex(cell, 2) * b[2];
}

Vec2 random_point_in_cell(const Triangulation& tri, int cell, Rng& rng) {
  double u = rng.uniform(), v = rng.uniform();
  if (u + v > 1.0) {
    u = 1.0 - u;
    v = 1.0 - v;
  }
  return from_barycentric(tri, cell, {1.0 - u - v, u, v});
}

void push_particle(ParticleSet& set, const Vec2& pos, int cell,
                   const ScalarFn& init_scalar, const VectorFn& init_vector) {
  set.x.push_back(pos);
  set.x_old.push_back(pos);
  set.host.push_back(cell);
  set.host_old.push_back(cell);
  set.alive.push_back(1);
  if (init_scalar) set.psi.push_back(init_scalar(pos));
  if (init_vector) set.v.push_back(init_vector(pos));
}

}  // namespace

ParticleSet seed(const Triangulation& tri, const SeedingConfig& cfg,
                 const ScalarFn& init_scalar, const VectorFn& init_vector) {
  if (cfg.target_per_cell < 1) {
    throw std::invalid_argument("seed: target_per_cell must be >= 1");
  }
  ParticleSet set;
  set.rng_seed = cfg.rng_seed;
  if (cfg.mode == SeedingConfig::Mode::Lattice) {
    const auto pts = lattice_points(cfg.target_per_cell);
    for (int c = 0; c < tri.num_cells(); ++c) {
      for (const auto& b : pts) {
        push_particle(set, from_barycentric(tri, c, b), c, init_scalar, init_vector);
      }
    }
    return set;
  }
  // area-weighted cell choice keeps the density uniform on graded meshes
  std::vector<double> cum(tri.num_cells());
  double total = 0.0;
  for (int c = 0; c < tri.num_cells(); ++c) {
    total += tri.cell_area(c);
    cum[c] = total;
  }
  Rng rng(cfg.rng_seed);
  const long long n = static_cast<long long>(cfg.target_per_cell) * tri.num_cells();
  for (long long p = 0; p < n; ++p) {
    const double r = rng.uniform() * total;
    const int cell = static_cast<int>(
        std::lower_bound(cum.begin(), cum.end(), r) - cum.begin());
    push_particle(set, random_point_in_cell(tri, std::min(cell, tri.num_cells() - 1), rng),
                  std::min(cell, tri.num_cells() - 1), init_scalar, init_vector);
  }
  return set;
}

int relocate(ParticleSet& set, const Triangulation& tri) {
  std::vector<int> lost(set.size(), 0);
  parallel_for(set.size(), [&](std::size_t p) {
    if (!set.alive[p]) return;
    auto loc = locate_cell(tri, set.x[p], set.host[p]);
    if (!loc) {
      set.alive[p] = 0;
      lost[p] = 1;
      return;
    }
    set.x[p] = wrap_periodic(tri, set.x[p]);
    set.host[p] = loc->cell_index;
  });
  int n = 0;
  for (int l : lost) n += l;
  return n;
}

void advect_prescribed_rk3(ParticleSet& set, const Triangulation& tri,
                           const std::function<Vec2(Vec2, double)>& a, double t_n,
                           double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("advect: dt must be positive");
  parallel_for(set.size(), [&](std::size_t p) {
    if (!set.alive[p]) return;
    const Vec2 x0 = set.x[p];
    set.x_old[p] = x0;
    set.host_old[p] = set.host[p];
    const Vec2 x1 = x0 + dt * a(x0, t_n);
    const Vec2 x2 = 0.75 * x0 + 0.25 * (x1 + dt * a(x1, t_n + dt));
    set.x[p] = (1.0 / 3.0) * x0 + (2.0 / 3.0) * (x2 + dt * a(x2, t_n + 0.5 * dt));
  });
  relocate(set, tri);
}

void advect_mesh_ab2(ParticleSet& set, const Triangulation& tri,
                     const DiscreteField& u_n, const DiscreteField& u_nm1, double dt,
                     bool first_step) {
  if (!(dt > 0.0)) throw std::invalid_argument("advect: dt must be positive");
  const ReferenceBasis basis(u_n.layout.degree);
  parallel_for(set.size(), [&](std::size_t p) {
    if (!set.alive[p]) return;
    const Vec2 x0 = set.x[p];
    const int h0 = set.host[p];
    // Adams-Bashforth extrapolation of the mesh velocity to the half step,
    // integrated with one midpoint stage: the extrapolation supplies the
    // partial time derivative and the midpoint re-evaluation supplies the
    // convective trajectory curvature, together a second-order path.
    auto u_half = [&](const CellLocation& at) {
      Vec2 u = evaluate_vector(u_n, at, basis);
      if (!first_step) u = 1.5 * u - 0.5 * evaluate_vector(u_nm1, at, basis);
      return u;
    };
    const CellLocation loc{h0, barycentric_coords(tri, h0, x0)};
    Vec2 step = u_half(loc);
    const Vec2 xm = wrap_periodic(tri, x0 + 0.5 * dt * step);
    if (auto mid = locate_cell(tri, xm, h0)) step = u_half(*mid);
    set.x_old[p] = x0;
    set.host_old[p] = h0;
    const Vec2 x1 = wrap_periodic(tri, x0 + dt * step);
    auto next = locate_cell(tri, x1, h0);
    if (!next) {
      set.alive[p] = 0;
      return;
    }
    set.x[p] = x1;
    set.host[p] = next->cell_index;
  });
  relocate(set, tri);
}

void manage_boundary(ParticleSet& set, const Triangulation& tri,
                     const ScalarFn& inflow_scalar, const VectorFn& inflow_vector,
                     int target_per_cell, int step) {
  compact(set);
  if ((set.has_scalar() && !inflow_scalar) || (set.has_vector() && !inflow_vector)) {
    throw std::invalid_argument("manage_boundary: missing inflow data for a payload");
  }
  std::vector<int> counts = set.per_cell_counts(tri);
  Rng rng(set.rng_seed ^ (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(step) + 1)));
  for (int f = 0; f < tri.num_facets(); ++f) {
    const Facet& facet = tri.facets[f];
    if (facet.n_sides != 1 || facet.marker != BoundaryMarker::DirichletInflowOnly) {
      continue;
    }
    const int cell = facet.sides[0].cell;
    while (counts[cell] < target_per_cell) {
      const Vec2 pos = random_point_in_cell(tri, cell, rng);
      push_particle(set, pos, cell, set.has_scalar() ? inflow_scalar : ScalarFn(),
                    set.has_vector() ? inflow_vector : VectorFn());
      ++counts[cell];
    }
  }
}

void compact(ParticleSet& set) {
  int n = set.size();
  for (int p = 0; p < n;) {
    if (set.alive[p]) {
      ++p;
      continue;
    }
    --n;
    set.x[p] = set.x[n];
    set.x_old[p] = set.x_old[n];
    set.host[p] = set.host[n];
    set.host_old[p] = set.host_old[n];
    set.alive[p] = set.alive[n];
    if (set.has_scalar()) set.psi[p] = set.psi[n];
    if (set.has_vector()) set.v[p] = set.v[n];
  }
  set.x.resize(n);
  set.x_old.resize(n);
  set.host.resize(n);
  set.host_old.resize(n);
  set.alive.resize(n);
  if (set.has_scalar()) set.psi.resize(n);
  if (set.has_vector()) set.v.resize(n);
}

void write_particles(std::ostream& out, const ParticleSet& set) {
  out << "# x y";
  if (set.has_scalar()) out << " psi";
  if (set.has_vector()) out << " vx vy";
  out << "\n";
  out.precision(17);
  for (int p = 0; p < set.size(); ++p) {
    if (!set.alive[p]) continue;
    out << set.x[p].x << " " << set.x[p].y;
    if (set.has_scalar()) out << " " << set.psi[p];
    if (set.has_vector()) out << " " << set.v[p].x << " " << set.v[p].y;
    out << "\n";
  }
}

}  // namespace pmhdg
