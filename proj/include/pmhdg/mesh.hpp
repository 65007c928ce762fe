#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pmhdg/geometry.hpp"

namespace pmhdg {

enum class BoundaryMarker : std::uint8_t {
  None = 0,          // interior facet
  DirichletFull,     // Dirichlet for both the projection and the Eulerian step
  DirichletInflowOnly,  // Dirichlet only where the advective velocity enters
  Neumann,
  Periodic,
};

enum class Diagonal { Left, Right, Crossed };

/// One side of a facet. `shift` translates a physical point lying on the
/// facet into the frame of `cell`; it is nonzero only on the image side of a
/// merged periodic facet pair.
struct FacetSide {
  int cell = -1;
  int local_facet = -1;  // 0,1,2: facet opposite to local vertex i
  Vec2 shift{};
};

struct Facet {
  std::array<int, 2> vertices{-1, -1};  // canonical order (lexicographic coords)
  int n_sides = 0;
  std::array<FacetSide, 2> sides{};
  BoundaryMarker marker = BoundaryMarker::None;
};

struct PeriodicPair {
  int facet = -1;   // original boundary facet (the surviving representative)
  int image = -1;   // boundary facet merged into it
  Vec2 translation{};  // maps points of `facet` onto `image`
};

class Triangulation {
 public:
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> cells;  // counterclockwise
  std::vector<Facet> facets;
  std::vector<std::array<int, 3>> cell_facets;     // facet index per local facet
  std::vector<std::array<int, 3>> cell_neighbors;  // -1 on boundary
  std::vector<double> h_per_cell;                  // longest edge of the cell
  std::vector<PeriodicPair> periodic_pairs;

  bool periodic_x = false;
  bool periodic_y = false;
  Box2 bounding_box{};

  int num_cells() const { return static_cast<int>(cells.size()); }
  int num_facets() const { return static_cast<int>(facets.size()); }
  int num_vertices() const { return static_cast<int>(vertices.size()); }

  Vec2 cell_vertex(int cell, int lv) const { return vertices[cells[cell][lv]]; }
  double cell_area(int cell) const;
  Vec2 cell_centroid(int cell) const;
  double h_min() const;
  double h_max() const;
  double total_area() const;

  /// Physical coordinates of the two endpoints of facet `f` as seen from
  /// side `side` (periodic shift applied), in canonical facet order.
  std::array<Vec2, 2> facet_endpoints(int f, int side) const;

  /// Local facet i is opposite local vertex i; endpoints in CCW cell order.
  std::array<int, 2> local_facet_vertices(int cell, int local_facet) const;

  void validate() const;  // throws on violated invariants
};

struct CellLocation {
  int cell_index = -1;
  std::array<double, 3> barycentric{};
};

inline constexpr double kLocateTol = 1e-12;

Triangulation generate_rectangle(int nx, int ny, const Box2& bounds,
                                 Diagonal diagonal,
                                 bool periodic_x = false, bool periodic_y = false,
                                 BoundaryMarker boundary = BoundaryMarker::DirichletFull);

/// Rectangle with per-side markers: {left, right, bottom, top}. Sides covered
/// by a periodic direction ignore their marker.
Triangulation generate_rectangle(int nx, int ny, const Box2& bounds,
                                 Diagonal diagonal, bool periodic_x, bool periodic_y,
                                 const std::array<BoundaryMarker, 4>& side_markers);

/// Polar-structured disk mesh: ring r carries 6r vertices, 6*n_rings^2 cells.
Triangulation generate_disk(double radius, int n_rings,
                            BoundaryMarker boundary = BoundaryMarker::DirichletFull);

/// Map a point into the fundamental domain of a (bi-)periodic mesh.
Vec2 wrap_periodic(const Triangulation& tri, const Vec2& point);

/// Walk search starting from `hint`; falls back to a full scan if the walk
/// stalls. Returns nullopt for points outside a non-periodic domain.
/// Points on shared facets resolve to the lowest incident cell index.
std::optional<CellLocation> locate_cell(const Triangulation& tri, const Vec2& point,
                                        int hint = -1);

std::array<double, 3> barycentric_coords(const Triangulation& tri, int cell,
                                         const Vec2& point);

/// Unit outward normal and length of a cell facet.
std::pair<Vec2, double> facet_geometry(const Triangulation& tri, int cell,
                                       int local_facet);

/// Plain-text mesh import: "vertices N / cells M", N coordinate lines,
/// M connectivity lines, then optional "facet i j MARKER" lines.
Triangulation read_mesh(std::istream& in);
Triangulation read_mesh_file(const std::string& path);

}  // namespace pmhdg
