#include "pmhdg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace pmhdg {

namespace {

bool less_lex(const Vec2& a, const Vec2& b, double tol) {
  if (a.x < b.x - tol) return true;
  if (a.x > b.x + tol) return false;
  return a.y < b.y - tol;
}

struct FacetBuilder {
  std::map<std::pair<int, int>, int> index;  // sorted vertex pair -> facet id
};

int get_or_create_facet(Triangulation& tri, FacetBuilder& fb, int v0, int v1) {
  auto key = std::minmax(v0, v1);
  auto it = fb.index.find(key);
  if (it != fb.index.end()) return it->second;
  Facet f;
  const double tol = 1e-12;
  if (less_lex(tri.vertices[v0], tri.vertices[v1], tol)) {
    f.vertices = {v0, v1};
  } else {
    f.vertices = {v1, v0};
  }
  int id = static_cast<int>(tri.facets.size());
  tri.facets.push_back(f);
  fb.index.emplace(key, id);
  return id;
}

void build_topology(Triangulation& tri) {
  FacetBuilder fb;
  const int nc = tri.num_cells();
  tri.cell_facets.assign(nc, {-1, -1, -1});
  tri.cell_neighbors.assign(nc, {-1, -1, -1});
  tri.h_per_cell.assign(nc, 0.0);
  for (int c = 0; c < nc; ++c) {
    const auto& cv = tri.cells[c];
    if (signed_area(tri.vertices[cv[0]], tri.vertices[cv[1]], tri.vertices[cv[2]]) <= 0.0) {
      throw std::runtime_error("mesh: cell " + std::to_string(c) +
                               " is degenerate or clockwise");
    }
    for (int lf = 0; lf < 3; ++lf) {
      int a = cv[(lf + 1) % 3];
      int b = cv[(lf + 2) % 3];
      int f = get_or_create_facet(tri, fb, a, b);
      tri.cell_facets[c][lf] = f;
      Facet& facet = tri.facets[f];
      if (facet.n_sides >= 2) {
        throw std::runtime_error("mesh: facet with more than two incident cells");
      }
      facet.sides[facet.n_sides++] = FacetSide{c, lf, Vec2{}};
      tri.h_per_cell[c] = std::max(tri.h_per_cell[c],
                                   (tri.vertices[a] - tri.vertices[b]).norm());
    }
  }
  for (int f = 0; f < tri.num_facets(); ++f) {
    const Facet& facet = tri.facets[f];
    if (facet.n_sides == 2) {
      const auto& s0 = facet.sides[0];
      const auto& s1 = facet.sides[1];
      tri.cell_neighbors[s0.cell][s0.local_facet] = s1.cell;
      tri.cell_neighbors[s1.cell][s1.local_facet] = s0.cell;
    }
  }
  Vec2 lo = tri.vertices.front(), hi = tri.vertices.front();
  for (const Vec2& v : tri.vertices) {
    lo.x = std::min(lo.x, v.x);
    lo.y = std::min(lo.y, v.y);
    hi.x = std::max(hi.x, v.x);
    hi.y = std::max(hi.y, v.y);
  }
  tri.bounding_box = {lo, hi};
}

Vec2 facet_midpoint(const Triangulation& tri, int f) {
  return (tri.vertices[tri.facets[f].vertices[0]] +
          tri.vertices[tri.facets[f].vertices[1]]) * 0.5;
}

/// Merge boundary facet pairs related by `translation` (a -> b). Facet a
/// survives with two sides; facet b keeps its index but loses its sides so
/// facet counts stay stable for the periodic_pairs record.
void merge_periodic(Triangulation& tri, double coord_tol,
                    const std::vector<std::pair<int, int>>& pairs,
                    const Vec2& translation) {
  (void)coord_tol;
  for (auto [fa, fb] : pairs) {
    Facet& a = tri.facets[fa];
    Facet& b = tri.facets[fb];
    if (a.n_sides != 1 || b.n_sides != 1) {
      throw std::runtime_error("mesh: periodic pairing on non-boundary facet");
    }
    FacetSide image_side = b.sides[0];
    image_side.shift = translation;  // point on facet a, shifted into b's cell
    a.sides[a.n_sides++] = image_side;
    a.marker = BoundaryMarker::Periodic;
    b.marker = BoundaryMarker::Periodic;
    b.n_sides = 0;
    tri.cell_facets[image_side.cell][image_side.local_facet] = fa;
    tri.periodic_pairs.push_back({fa, fb, translation});
    tri.periodic_pairs.push_back({fb, fa, translation * -1.0});
  }
}

/// Pair boundary facets lying on line coord==lo_val with those on hi_val
/// (coordinate selected by axis: 0 = x, 1 = y).
std::vector<std::pair<int, int>> find_periodic_pairs(const Triangulation& tri,
                                                     int axis, double lo_val,
                                                     double hi_val, double tol) {
  std::vector<std::pair<Vec2, int>> lo_facets, hi_facets;
  for (int f = 0; f < tri.num_facets(); ++f) {
    if (tri.facets[f].n_sides != 1) continue;
    const Vec2 p0 = tri.vertices[tri.facets[f].vertices[0]];
    const Vec2 p1 = tri.vertices[tri.facets[f].vertices[1]];
    double c0 = axis == 0 ? p0.x : p0.y;
    double c1 = axis == 0 ? p1.x : p1.y;
    if (std::abs(c0 - lo_val) < tol && std::abs(c1 - lo_val) < tol) {
      lo_facets.emplace_back(facet_midpoint(tri, f), f);
    } else if (std::abs(c0 - hi_val) < tol && std::abs(c1 - hi_val) < tol) {
      hi_facets.emplace_back(facet_midpoint(tri, f), f);
    }
  }
  auto other_coord = [axis](const Vec2& p) { return axis == 0 ? p.y : p.x; };
  auto by_other = [&](const auto& a, const auto& b) {
    return other_coord(a.first) < other_coord(b.first);
  };
  std::sort(lo_facets.begin(), lo_facets.end(), by_other);
  std::sort(hi_facets.begin(), hi_facets.end(), by_other);
  if (lo_facets.size() != hi_facets.size()) {
    throw std::runtime_error("mesh: mismatched periodic boundary facets");
  }
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i < lo_facets.size(); ++i) {
    if (std::abs(other_coord(lo_facets[i].first) - other_coord(hi_facets[i].first)) > tol) {
      throw std::runtime_error("mesh: periodic facets do not line up");
    }
    pairs.emplace_back(lo_facets[i].second, hi_facets[i].second);
  }
  return pairs;
}

}  // namespace

double Triangulation::cell_area(int cell) const {
  return signed_area(cell_vertex(cell, 0), cell_vertex(cell, 1), cell_vertex(cell, 2));
}

Vec2 Triangulation::cell_centroid(int cell) const {
  return (cell_vertex(cell, 0) + cell_vertex(cell, 1) + cell_vertex(cell, 2)) / 3.0;
}

double Triangulation::h_min() const {
  double h = h_per_cell.front();
  for (double v : h_per_cell) h = std::min(h, v);
  return h;
}

double Triangulation::h_max() const {
  double h = 0.0;
  for (double v : h_per_cell) h = std::max(h, v);
  return h;
}

double Triangulation::total_area() const {
  double a = 0.0;
  for (int c = 0; c < num_cells(); ++c) a += cell_area(c);
  return a;
}

std::array<Vec2, 2> Triangulation::facet_endpoints(int f, int side) const {
  const Facet& facet = facets[f];
  Vec2 a = vertices[facet.vertices[0]] + facet.sides[side].shift;
  Vec2 b = vertices[facet.vertices[1]] + facet.sides[side].shift;
  return {a, b};
}

std::array<int, 2> Triangulation::local_facet_vertices(int cell, int local_facet) const {
  return {cells[cell][(local_facet + 1) % 3], cells[cell][(local_facet + 2) % 3]};
}

void Triangulation::validate() const {
  for (int c = 0; c < num_cells(); ++c) {
    if (cell_area(c) <= 0.0) throw std::runtime_error("mesh: non-positive cell area");
  }
  for (int f = 0; f < num_facets(); ++f) {
    const Facet& facet = facets[f];
    if (facet.n_sides == 0) continue;  // merged periodic image
    if (facet.n_sides == 2) {
      auto [n0, l0] = facet_geometry(*this, facet.sides[0].cell, facet.sides[0].local_facet);
      auto [n1, l1] = facet_geometry(*this, facet.sides[1].cell, facet.sides[1].local_facet);
      if ((n0 + n1).norm() > 1e-12 || std::abs(l0 - l1) > 1e-12) {
        throw std::runtime_error("mesh: interior facet normals not antiparallel");
      }
    }
  }
  // periodic_pairs must be an involution with negated translations
  std::map<int, const PeriodicPair*> by_facet;
  for (const auto& pp : periodic_pairs) by_facet[pp.facet] = &pp;
  for (const auto& pp : periodic_pairs) {
    auto it = by_facet.find(pp.image);
    if (it == by_facet.end() || it->second->image != pp.facet ||
        (it->second->translation + pp.translation).norm() > 1e-12) {
      throw std::runtime_error("mesh: periodic pairing is not an involution");
    }
  }
}

Triangulation generate_rectangle(int nx, int ny, const Box2& bounds, Diagonal diagonal,
                                 bool periodic_x, bool periodic_y,
                                 BoundaryMarker boundary) {
  return generate_rectangle(nx, ny, bounds, diagonal, periodic_x, periodic_y,
                            std::array<BoundaryMarker, 4>{boundary, boundary, boundary,
                                                          boundary});
}

Triangulation generate_rectangle(int nx, int ny, const Box2& bounds, Diagonal diagonal,
                                 bool periodic_x, bool periodic_y,
                                 const std::array<BoundaryMarker, 4>& side_markers) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("generate_rectangle: need nx, ny >= 1");
  const double w = bounds.width(), h = bounds.height();
  if (!(w > 0.0) || !(h > 0.0)) {
    throw std::invalid_argument("generate_rectangle: degenerate box");
  }
  Triangulation tri;
  const double dx = w / nx, dy = h / ny;
  auto vid = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      tri.vertices.push_back({bounds.lo.x + i * dx, bounds.lo.y + j * dy});
    }
  }
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      switch (diagonal) {
        case Diagonal::Right:  // diagonal along (1,1)
          tri.cells.push_back({v00, v10, v11});
          tri.cells.push_back({v00, v11, v01});
          break;
        case Diagonal::Left:  // diagonal along (-1,1)
          tri.cells.push_back({v00, v10, v01});
          tri.cells.push_back({v10, v11, v01});
          break;
        case Diagonal::Crossed: {
          int vc = static_cast<int>(tri.vertices.size());
          tri.vertices.push_back({bounds.lo.x + (i + 0.5) * dx, bounds.lo.y + (j + 0.5) * dy});
          tri.cells.push_back({v00, v10, vc});
          tri.cells.push_back({v10, v11, vc});
          tri.cells.push_back({v11, v01, vc});
          tri.cells.push_back({v01, v00, vc});
          break;
        }
      }
    }
  }
  build_topology(tri);

  const double tol = 1e-9 * std::max(w, h);
  for (int f = 0; f < tri.num_facets(); ++f) {
    Facet& facet = tri.facets[f];
    if (facet.n_sides != 1) continue;
    const Vec2 m = facet_midpoint(tri, f);
    if (std::abs(m.x - bounds.lo.x) < tol) facet.marker = side_markers[0];
    else if (std::abs(m.x - bounds.hi.x) < tol) facet.marker = side_markers[1];
    else if (std::abs(m.y - bounds.lo.y) < tol) facet.marker = side_markers[2];
    else facet.marker = side_markers[3];
  }
  if (periodic_x) {
    merge_periodic(tri, tol, find_periodic_pairs(tri, 0, bounds.lo.x, bounds.hi.x, tol),
                   {w, 0.0});
    tri.periodic_x = true;
  }
  if (periodic_y) {
    merge_periodic(tri, tol, find_periodic_pairs(tri, 1, bounds.lo.y, bounds.hi.y, tol),
                   {0.0, h});
    tri.periodic_y = true;
  }
  tri.validate();
  return tri;
}

Triangulation generate_disk(double radius, int n_rings, BoundaryMarker boundary) {
  if (n_rings < 1) throw std::invalid_argument("generate_disk: need n_rings >= 1");
  if (!(radius > 0.0)) throw std::invalid_argument("generate_disk: degenerate radius");
  Triangulation tri;
  tri.vertices.push_back({0.0, 0.0});
  std::vector<int> ring_start(n_rings + 1, 0);
  for (int r = 1; r <= n_rings; ++r) {
    ring_start[r] = static_cast<int>(tri.vertices.size());
    const double rad = radius * r / n_rings;
    const int n = 6 * r;
    for (int t = 0; t < n; ++t) {
      const double th = 2.0 * M_PI * t / n;
      tri.vertices.push_back({rad * std::cos(th), rad * std::sin(th)});
    }
  }
  auto add_cell = [&](int a, int b, int c) {
    if (signed_area(tri.vertices[a], tri.vertices[b], tri.vertices[c]) < 0.0) std::swap(b, c);
    tri.cells.push_back({a, b, c});
  };
  for (int r = 1; r <= n_rings; ++r) {
    const int n_out = 6 * r, n_in = 6 * (r - 1);
    auto outer = [&](int m) { return ring_start[r] + ((m % n_out) + n_out) % n_out; };
    auto inner = [&](int m) {
      if (r == 1) return 0;  // center vertex
      return ring_start[r - 1] + ((m % n_in) + n_in) % n_in;
    };
    for (int s = 0; s < 6; ++s) {
      for (int j = 0; j < r; ++j) {
        add_cell(outer(s * r + j), outer(s * r + j + 1), inner(s * (r - 1) + j));
      }
      for (int j = 0; j + 1 < r; ++j) {
        add_cell(outer(s * r + j + 1), inner(s * (r - 1) + j + 1), inner(s * (r - 1) + j));
      }
    }
  }
  build_topology(tri);
  for (auto& facet : tri.facets) {
    if (facet.n_sides == 1) facet.marker = boundary;
  }
  tri.validate();
  return tri;
}

Vec2 wrap_periodic(const Triangulation& tri, const Vec2& point) {
  Vec2 p = point;
  const Box2& bb = tri.bounding_box;
  if (tri.periodic_x) {
    const double w = bb.width();
    p.x = bb.lo.x + std::fmod(p.x - bb.lo.x, w);
    if (p.x < bb.lo.x) p.x += w;
  }
  if (tri.periodic_y) {
    const double h = bb.height();
    p.y = bb.lo.y + std::fmod(p.y - bb.lo.y, h);
    if (p.y < bb.lo.y) p.y += h;
  }
  return p;
}

std::array<double, 3> barycentric_coords(const Triangulation& tri, int cell,
                                         const Vec2& point) {
  const Vec2 a = tri.cell_vertex(cell, 0);
  const Vec2 b = tri.cell_vertex(cell, 1);
  const Vec2 c = tri.cell_vertex(cell, 2);
  const double area = signed_area(a, b, c);
  return {signed_area(point, b, c) / area, signed_area(a, point, c) / area,
          signed_area(a, b, point) / area};
}

namespace {

bool contains(const std::array<double, 3>& bary) {
  return bary[0] >= -kLocateTol && bary[1] >= -kLocateTol && bary[2] >= -kLocateTol;
}

std::optional<CellLocation> resolve_ties(const Triangulation& tri, const Vec2& p,
                                         int found) {
  // points on shared facets belong to the lowest incident cell index
  int best = found;
  auto bary = barycentric_coords(tri, found, p);
  for (int i = 0; i < 3; ++i) {
    if (std::abs(bary[i]) <= kLocateTol) {
      int nb = tri.cell_neighbors[found][i];
      if (nb >= 0 && nb < best && contains(barycentric_coords(tri, nb, p))) best = nb;
    }
  }
  return CellLocation{best, barycentric_coords(tri, best, p)};
}

}  // namespace

std::optional<CellLocation> locate_cell(const Triangulation& tri, const Vec2& point,
                                        int hint) {
  if (!std::isfinite(point.x) || !std::isfinite(point.y)) {
    throw std::invalid_argument("locate_cell: non-finite point");
  }
  const Vec2 p = wrap_periodic(tri, point);
  int cur = (hint >= 0 && hint < tri.num_cells()) ? hint : 0;
  const int max_steps = 2 * tri.num_cells() + 8;
  for (int step = 0; step < max_steps; ++step) {
    auto bary = barycentric_coords(tri, cur, p);
    int worst = 0;
    for (int i = 1; i < 3; ++i) {
      if (bary[i] < bary[worst]) worst = i;
    }
    if (bary[worst] >= -kLocateTol) return resolve_ties(tri, p, cur);
    int nb = tri.cell_neighbors[cur][worst];
    if (nb < 0) break;  // hit the boundary; fall back to a scan
    cur = nb;
  }
  for (int c = 0; c < tri.num_cells(); ++c) {
    if (contains(barycentric_coords(tri, c, p))) return resolve_ties(tri, p, c);
  }
  return std::nullopt;
}

std::pair<Vec2, double> facet_geometry(const Triangulation& tri, int cell,
                                       int local_facet) {
  const auto lv = tri.local_facet_vertices(cell, local_facet);
  const Vec2 a = tri.vertices[lv[0]];
  const Vec2 b = tri.vertices[lv[1]];
  const Vec2 t = b - a;
  const double len = t.norm();
  return {Vec2{t.y / len, -t.x / len}, len};
}

Triangulation read_mesh(std::istream& in) {
  std::string tok;
  int nv = 0, nc = 0;
  if (!(in >> tok >> nv) || tok != "vertices") {
    throw std::runtime_error("read_mesh: expected 'vertices N'");
  }
  if (!(in >> tok >> nc) || tok != "cells") {
    throw std::runtime_error("read_mesh: expected 'cells M'");
  }
  Triangulation tri;
  tri.vertices.resize(nv);
  for (int i = 0; i < nv; ++i) {
    if (!(in >> tri.vertices[i].x >> tri.vertices[i].y)) {
      throw std::runtime_error("read_mesh: bad vertex line");
    }
  }
  tri.cells.resize(nc);
  for (int i = 0; i < nc; ++i) {
    if (!(in >> tri.cells[i][0] >> tri.cells[i][1] >> tri.cells[i][2])) {
      throw std::runtime_error("read_mesh: bad cell line");
    }
  }
  build_topology(tri);
  while (in >> tok) {
    if (tok != "facet") throw std::runtime_error("read_mesh: expected 'facet i j MARKER'");
    int a = 0, b = 0;
    std::string name;
    if (!(in >> a >> b >> name)) throw std::runtime_error("read_mesh: bad facet line");
    BoundaryMarker m;
    if (name == "DIRICHLET") m = BoundaryMarker::DirichletFull;
    else if (name == "DIRICHLET_INFLOW") m = BoundaryMarker::DirichletInflowOnly;
    else if (name == "NEUMANN") m = BoundaryMarker::Neumann;
    else throw std::runtime_error("read_mesh: unknown marker " + name);
    bool matched = false;
    for (auto& facet : tri.facets) {
      // canonical facet order is coordinate based, so compare as a set
      if (std::minmax(facet.vertices[0], facet.vertices[1]) == std::minmax(a, b)) {
        facet.marker = m;
        matched = true;
        break;
      }
    }
    if (!matched) throw std::runtime_error("read_mesh: facet marker for unknown facet");
  }
  tri.validate();
  return tri;
}

Triangulation read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_mesh_file: cannot open " + path);
  return read_mesh(in);
}

}  // namespace pmhdg
