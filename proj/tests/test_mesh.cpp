#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "pmhdg/mesh.hpp"
#include "pmhdg/rng.hpp"

using namespace pmhdg;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Exhaustive point-location oracle: smallest barycentric coordinate must be
// nonnegative (within tolerance); ties resolve to the lowest cell index.
int brute_force_locate(const Triangulation& tri, const Vec2& p) {
  for (int c = 0; c < tri.num_cells(); ++c) {
    const auto b = barycentric_coords(tri, c, p);
    if (std::min({b[0], b[1], b[2]}) >= -1e-12) return c;
  }
  return -1;
}

}  // namespace

TEST_CASE("rectangle mesh counts") {
  const Triangulation tri =
      generate_rectangle(8, 4, {{0.0, 0.0}, {1.0, 0.5}}, Diagonal::Right);
  CHECK(tri.num_cells() == 64);
  CHECK(tri.num_vertices() == 9 * 5);
  CHECK(tri.total_area() == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("two-cell unit square topology") {
  const Triangulation tri =
      generate_rectangle(1, 1, {{0.0, 0.0}, {1.0, 1.0}}, Diagonal::Right);
  CHECK(tri.num_cells() == 2);
  int interior = 0, boundary = 0;
  for (const Facet& f : tri.facets) {
    if (f.n_sides == 2) ++interior;
    else ++boundary;
  }
  CHECK(interior == 1);
  CHECK(boundary == 4);
}

TEST_CASE("bi-periodic rectangle has no exposed boundary") {
  const Triangulation tri = generate_rectangle(
      20, 20, {{-1.0, -1.0}, {1.0, 1.0}}, Diagonal::Right, true, true,
      BoundaryMarker::Periodic);
  CHECK(tri.num_cells() == 800);
  int exposed = 0;
  for (const Facet& f : tri.facets) {
    if (f.n_sides == 1) ++exposed;
  }
  CHECK(exposed == 0);
  // every periodic facet carries two sides after merging
  for (const PeriodicPair& pp : tri.periodic_pairs) {
    CHECK(tri.facets[pp.facet].n_sides == 2);
  }
}

TEST_CASE("disk mesh counts, area and grading") {
  const Triangulation one = generate_disk(0.5, 1);
  CHECK(one.num_cells() == 6);

  const Triangulation fine = generate_disk(0.5, 8);
  CHECK(fine.num_cells() == 6 * 8 * 8);
  const double disk_area = kPi * 0.25;
  CHECK(std::abs(fine.total_area() - disk_area) / disk_area < 0.01);

  const Triangulation graded = generate_disk(0.5, 16);
  CHECK(graded.h_max() / graded.h_min() <= 3.0);
}

TEST_CASE("locate_cell at vertices, centroids and wrapped points") {
  const Triangulation tri =
      generate_rectangle(4, 4, {{0.0, 0.0}, {1.0, 1.0}}, Diagonal::Right);
  // centroid of every cell resolves to that cell
  for (int c = 0; c < tri.num_cells(); ++c) {
    const auto loc = locate_cell(tri, tri.cell_centroid(c));
    REQUIRE(loc.has_value());
    CHECK(loc->cell_index == c);
  }
  // a shared vertex resolves to the lowest incident cell
  const Vec2 v = tri.vertices[tri.cells[5][0]];
  const auto at_vertex = locate_cell(tri, v);
  REQUIRE(at_vertex.has_value());
  CHECK(at_vertex->cell_index == brute_force_locate(tri, v));

  const Triangulation per = generate_rectangle(
      4, 4, {{-1.0, -1.0}, {1.0, 1.0}}, Diagonal::Right, true, true,
      BoundaryMarker::Periodic);
  const auto wrapped = locate_cell(per, {1.3, 0.1});
  REQUIRE(wrapped.has_value());
  const auto direct = locate_cell(per, {-0.7, 0.1});
  REQUIRE(direct.has_value());
  CHECK(wrapped->cell_index == direct->cell_index);

  // outside a non-periodic domain
  CHECK(!locate_cell(tri, {2.0, 2.0}).has_value());
}

TEST_CASE("walk search agrees with the exhaustive oracle") {
  const Triangulation tri =
      generate_rectangle(9, 7, {{0.0, 0.0}, {1.0, 1.0}}, Diagonal::Right);
  Rng rng(1234);
  for (int trial = 0; trial < 1000; ++trial) {
    const Vec2 p{rng.uniform(), rng.uniform()};
    const int hint = static_cast<int>(rng.uniform() * tri.num_cells());
    const auto loc = locate_cell(tri, p, hint);
    REQUIRE(loc.has_value());
    CHECK(loc->cell_index == brute_force_locate(tri, p));
    // barycentric coordinates reproduce the point
    Vec2 rec{0.0, 0.0};
    for (int i = 0; i < 3; ++i) {
      rec += loc->barycentric[i] * tri.cell_vertex(loc->cell_index, i);
    }
    CHECK((rec - p).norm() < 1e-12);
  }
}

TEST_CASE("facet normals and lengths") {
  const Triangulation tri =
      generate_rectangle(1, 1, {{0.0, 0.0}, {1.0, 1.0}}, Diagonal::Right);
  const double s = std::sqrt(0.5);
  // find the interior (diagonal) facet and check both one-sided normals
  for (int f = 0; f < tri.num_facets(); ++f) {
    const Facet& facet = tri.facets[f];
    if (facet.n_sides != 2) continue;
    Vec2 n[2];
    double len[2];
    for (int side = 0; side < 2; ++side) {
      const FacetSide& fs = facet.sides[side];
      std::tie(n[side], len[side]) = facet_geometry(tri, fs.cell, fs.local_facet);
    }
    CHECK(len[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));
    CHECK(len[1] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));
    CHECK((n[0] + n[1]).norm() < 1e-13);           // antiparallel
    CHECK(std::abs(std::abs(n[0].x) - s) < 1e-13);  // +-45 degrees
    CHECK(std::abs(std::abs(n[0].y) - s) < 1e-13);
  }
  // closed-surface identity: sum of n*L over each cell's facets vanishes
  for (int c = 0; c < tri.num_cells(); ++c) {
    Vec2 total{0.0, 0.0};
    for (int lf = 0; lf < 3; ++lf) {
      const auto [n, len] = facet_geometry(tri, c, lf);
      total += len * n;
    }
    CHECK(total.norm() < 1e-13);
  }
}

TEST_CASE("periodic wrap") {
  const Triangulation tri = generate_rectangle(
      4, 4, {{-1.0, -1.0}, {1.0, 1.0}}, Diagonal::Right, true, true,
      BoundaryMarker::Periodic);
  const Vec2 w = wrap_periodic(tri, {1.3, 0.0});
  CHECK(w.x == doctest::Approx(-0.7).epsilon(1e-13));
  CHECK(w.y == doctest::Approx(0.0));
  const Vec2 again = wrap_periodic(tri, w);
  CHECK((again - w).norm() == 0.0);  // idempotent
  const Vec2 corner = wrap_periodic(tri, {1.5, -1.5});
  CHECK(corner.x == doctest::Approx(-0.5).epsilon(1e-13));
  CHECK(corner.y == doctest::Approx(0.5).epsilon(1e-13));

  const Triangulation fixed =
      generate_rectangle(4, 4, {{-1.0, -1.0}, {1.0, 1.0}}, Diagonal::Right);
  const Vec2 untouched = wrap_periodic(fixed, {1.3, 0.0});
  CHECK(untouched.x == doctest::Approx(1.3));
}

TEST_CASE("plain-text mesh import") {
  // unit square split along the main diagonal, with per-facet markers
  std::istringstream in(
      "vertices 4\n"
      "cells 2\n"
      "0 0\n"
      "1 0\n"
      "1 1\n"
      "0 1\n"
      "0 1 2\n"
      "0 2 3\n"
      "facet 0 1 DIRICHLET\n"
      "facet 1 2 NEUMANN\n"
      "facet 2 3 DIRICHLET_INFLOW\n"
      "facet 3 0 DIRICHLET\n");
  const Triangulation tri = read_mesh(in);
  CHECK(tri.num_cells() == 2);
  CHECK(tri.num_vertices() == 4);
  CHECK(tri.total_area() == doctest::Approx(1.0).epsilon(1e-13));
  int dirichlet = 0, neumann = 0, inflow = 0, interior = 0;
  for (const Facet& f : tri.facets) {
    if (f.n_sides == 2) ++interior;
    else if (f.marker == BoundaryMarker::DirichletFull) ++dirichlet;
    else if (f.marker == BoundaryMarker::Neumann) ++neumann;
    else if (f.marker == BoundaryMarker::DirichletInflowOnly) ++inflow;
  }
  CHECK(interior == 1);
  CHECK(dirichlet == 2);
  CHECK(neumann == 1);
  CHECK(inflow == 1);

  std::istringstream bad("vertices 1\ncells 0\n0 0\nfacet 0 1 BOGUS\n");
  CHECK_THROWS(read_mesh(bad));
}
