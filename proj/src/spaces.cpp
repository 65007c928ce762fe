#include "pmhdg/spaces.hpp"

#include <cmath>
#include <stdexcept>

#include "pmhdg/parallel.hpp"

namespace pmhdg {

namespace {

void check_degree(int degree) {
  if (degree < 0 || degree > 4) {
    throw std::invalid_argument("basis degree must be in 0..4");
  }
}

/// Monomial exponents (a, b) with a + b <= k, in a fixed order.
std::vector<std::pair<int, int>> triangle_monomials(int k) {
  std::vector<std::pair<int, int>> m;
  for (int t = 0; t <= k; ++t) {
    for (int a = t; a >= 0; --a) m.emplace_back(a, t - a);
  }
  return m;
}

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

}  // namespace

ReferenceBasis::ReferenceBasis(int degree) : degree_(degree) {
  check_degree(degree);
  if (degree == 0) {
    nodes_ = {{1.0 / 3.0, 1.0 / 3.0}};
  } else {
    for (int j = 0; j <= degree; ++j) {
      for (int i = 0; i + j <= degree; ++i) {
        nodes_.push_back({double(i) / degree, double(j) / degree});
      }
    }
  }
  const auto monos = triangle_monomials(degree);
  const int n = dim();
  Eigen::MatrixXd vand(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      vand(r, c) = ipow(nodes_[r].x, monos[c].first) * ipow(nodes_[r].y, monos[c].second);
    }
  }
  coeff_ = vand.fullPivLu().inverse();  // column i holds basis i in monomials
}

void ReferenceBasis::eval(const Vec2& p, double* values) const {
  const auto monos = triangle_monomials(degree_);
  const int n = dim();
  for (int i = 0; i < n; ++i) {
    double v = 0.0;
    for (int m = 0; m < n; ++m) {
      v += coeff_(m, i) * ipow(p.x, monos[m].first) * ipow(p.y, monos[m].second);
    }
    values[i] = v;
  }
}

void ReferenceBasis::eval_grad(const Vec2& p, Vec2* grads) const {
  const auto monos = triangle_monomials(degree_);
  const int n = dim();
  for (int i = 0; i < n; ++i) {
    Vec2 g{0.0, 0.0};
    for (int m = 0; m < n; ++m) {
      const int a = monos[m].first, b = monos[m].second;
      if (a > 0) g.x += coeff_(m, i) * a * ipow(p.x, a - 1) * ipow(p.y, b);
      if (b > 0) g.y += coeff_(m, i) * b * ipow(p.x, a) * ipow(p.y, b - 1);
    }
    grads[i] = g;
  }
}

Eigen::MatrixXd ReferenceBasis::tabulate(const std::vector<Vec2>& pts) const {
  Eigen::MatrixXd out(pts.size(), dim());
  std::vector<double> row(dim());
  for (std::size_t q = 0; q < pts.size(); ++q) {
    eval(pts[q], row.data());
    for (int i = 0; i < dim(); ++i) out(q, i) = row[i];
  }
  return out;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> ReferenceBasis::tabulate_grad(
    const std::vector<Vec2>& pts) const {
  Eigen::MatrixXd dx(pts.size(), dim()), dy(pts.size(), dim());
  std::vector<Vec2> row(dim());
  for (std::size_t q = 0; q < pts.size(); ++q) {
    eval_grad(pts[q], row.data());
    for (int i = 0; i < dim(); ++i) {
      dx(q, i) = row[i].x;
      dy(q, i) = row[i].y;
    }
  }
  return {dx, dy};
}

SegmentBasis::SegmentBasis(int degree) : degree_(degree) {
  check_degree(degree);
  if (degree == 0) {
    nodes_ = {0.5};
  } else {
    for (int i = 0; i <= degree; ++i) nodes_.push_back(double(i) / degree);
  }
  const int n = dim();
  Eigen::MatrixXd vand(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) vand(r, c) = ipow(nodes_[r], c);
  }
  coeff_ = vand.fullPivLu().inverse();
}

void SegmentBasis::eval(double s, double* values) const {
  const int n = dim();
  for (int i = 0; i < n; ++i) {
    double v = 0.0;
    for (int m = 0; m < n; ++m) v += coeff_(m, i) * ipow(s, m);
    values[i] = v;
  }
}

Eigen::MatrixXd SegmentBasis::tabulate(const std::vector<double>& pts) const {
  Eigen::MatrixXd out(pts.size(), dim());
  std::vector<double> row(dim());
  for (std::size_t q = 0; q < pts.size(); ++q) {
    eval(pts[q], row.data());
    for (int i = 0; i < dim(); ++i) out(q, i) = row[i];
  }
  return out;
}

SegmentQuadrature segment_quadrature(int exactness_degree) {
  if (exactness_degree < 0 || exactness_degree > 12) {
    throw std::invalid_argument("quadrature exactness must be in 0..12");
  }
  const int n = (exactness_degree + 2) / 2;  // 2n-1 >= degree
  // Golub-Welsch: eigenvalues of the Jacobi matrix for Legendre polynomials
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double b = i / std::sqrt(4.0 * i * i - 1.0);
    jac(i, i - 1) = b;
    jac(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  SegmentQuadrature rule;
  for (int i = 0; i < n; ++i) {
    const double xi = es.eigenvalues()(i);           // node on [-1,1]
    const double w = 2.0 * es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
    rule.points.push_back(0.5 * (xi + 1.0));
    rule.weights.push_back(0.5 * w);
  }
  return rule;
}

TriangleQuadrature triangle_quadrature(int exactness_degree) {
  if (exactness_degree < 0 || exactness_degree > 12) {
    throw std::invalid_argument("quadrature exactness must be in 0..12");
  }
  // Collapse the square onto the triangle: x = u, y = v(1-u), jacobian 1-u.
  // The extra factor raises the u-degree by one.
  const SegmentQuadrature gu = segment_quadrature(exactness_degree + 1);
  const SegmentQuadrature gv = segment_quadrature(exactness_degree);
  TriangleQuadrature rule;
  for (std::size_t i = 0; i < gu.points.size(); ++i) {
    for (std::size_t j = 0; j < gv.points.size(); ++j) {
      const double u = gu.points[i], v = gv.points[j];
      rule.points.push_back({u, v * (1.0 - u)});
      rule.weights.push_back(gu.weights[i] * gv.weights[j] * (1.0 - u));
    }
  }
  return rule;
}

CellMap CellMap::from(const Triangulation& tri, int cell) {
  CellMap m;
  m.v0 = tri.cell_vertex(cell, 0);
  const Vec2 e1 = tri.cell_vertex(cell, 1) - m.v0;
  const Vec2 e2 = tri.cell_vertex(cell, 2) - m.v0;
  m.j00 = e1.x;
  m.j10 = e1.y;
  m.j01 = e2.x;
  m.j11 = e2.y;
  m.det = m.j00 * m.j11 - m.j01 * m.j10;
  m.i00 = m.j11 / m.det;
  m.i01 = -m.j01 / m.det;
  m.i10 = -m.j10 / m.det;
  m.i11 = m.j00 / m.det;
  return m;
}

FacetTrace facet_trace(const Triangulation& tri, int cell, int local_facet,
                       const std::vector<double>& s_points) {
  FacetTrace tr;
  tr.facet = tri.cell_facets[cell][local_facet];
  const Facet& facet = tri.facets[tr.facet];
  for (int s = 0; s < facet.n_sides; ++s) {
    if (facet.sides[s].cell == cell && facet.sides[s].local_facet == local_facet) {
      tr.side = s;
    }
  }
  if (tr.side < 0) throw std::logic_error("facet_trace: cell is not a side of facet");
  const auto ends = tri.facet_endpoints(tr.facet, tr.side);
  auto [normal, length] = facet_geometry(tri, cell, local_facet);
  tr.normal = normal;
  tr.length = length;
  const CellMap map = CellMap::from(tri, cell);
  tr.cell_ref.reserve(s_points.size());
  tr.physical.reserve(s_points.size());
  for (double s : s_points) {
    const Vec2 x = ends[0] + s * (ends[1] - ends[0]);
    tr.physical.push_back(x);
    tr.cell_ref.push_back(map.to_reference(x));
  }
  return tr;
}

DofLayout build_layout(const Triangulation& tri, LayoutKind kind, int degree,
                       int components,
                       const std::vector<BoundaryMarker>& dirichlet_markers) {
  check_degree(degree);
  if (components != 1 && components != 2) {
    throw std::invalid_argument("build_layout: components must be 1 or 2");
  }
  DofLayout layout;
  layout.kind = kind;
  layout.degree = degree;
  layout.components = components;
  if (kind == LayoutKind::CellDiscontinuous) {
    layout.dofs_per_entity = components * (degree + 1) * (degree + 2) / 2;
    layout.entity_offset.resize(tri.num_cells());
    for (int c = 0; c < tri.num_cells(); ++c) {
      layout.entity_offset[c] = c * layout.dofs_per_entity;
    }
    layout.num_dofs = tri.num_cells() * layout.dofs_per_entity;
    return layout;
  }
  layout.dofs_per_entity = components * (degree + 1);
  layout.entity_offset.assign(tri.num_facets(), -1);
  layout.facet_constrained.assign(tri.num_facets(), 0);
  int next = 0;
  for (int f = 0; f < tri.num_facets(); ++f) {
    if (tri.facets[f].n_sides == 0) continue;  // merged periodic image
    layout.entity_offset[f] = next;
    next += layout.dofs_per_entity;
  }
  // merged images alias their representative's block
  for (const auto& pp : tri.periodic_pairs) {
    if (layout.entity_offset[pp.facet] < 0) {
      layout.entity_offset[pp.facet] = layout.entity_offset[pp.image];
    }
  }
  layout.num_dofs = next;
  for (int f = 0; f < tri.num_facets(); ++f) {
    const Facet& facet = tri.facets[f];
    if (facet.n_sides != 1) continue;
    for (BoundaryMarker m : dirichlet_markers) {
      if (facet.marker == m) {
        layout.facet_constrained[f] = 1;
        for (int d = 0; d < layout.dofs_per_entity; ++d) {
          layout.constrained_dofs.push_back(layout.entity_offset[f] + d);
        }
        break;
      }
    }
  }
  std::sort(layout.constrained_dofs.begin(), layout.constrained_dofs.end());
  return layout;
}

DiscreteField DiscreteField::zero(const DofLayout& layout) {
  DiscreteField f;
  f.layout = layout;
  f.coeffs = Eigen::VectorXd::Zero(layout.num_dofs);
  return f;
}

namespace {

void require_cell_kind(const DiscreteField& f) {
  if (f.layout.kind != LayoutKind::CellDiscontinuous) {
    throw std::invalid_argument("facet field evaluated in a cell interior");
  }
}

}  // namespace

double evaluate_scalar(const DiscreteField& f, const CellLocation& loc,
                       const ReferenceBasis& basis) {
  require_cell_kind(f);
  const Vec2 ref{loc.barycentric[1], loc.barycentric[2]};
  double vals[16];
  basis.eval(ref, vals);
  double v = 0.0;
  const int off = f.layout.offset(loc.cell_index);
  for (int i = 0; i < basis.dim(); ++i) v += f.coeffs[off + i] * vals[i];
  return v;
}

double evaluate_scalar(const Triangulation& tri, const DiscreteField& f,
                       const CellLocation& loc) {
  (void)tri;
  return evaluate_scalar(f, loc, ReferenceBasis(f.layout.degree));
}

Vec2 evaluate_vector(const DiscreteField& f, const CellLocation& loc,
                     const ReferenceBasis& basis) {
  require_cell_kind(f);
  const Vec2 ref{loc.barycentric[1], loc.barycentric[2]};
  double vals[16];
  basis.eval(ref, vals);
  Vec2 v{0.0, 0.0};
  const int off = f.layout.offset(loc.cell_index);
  for (int i = 0; i < basis.dim(); ++i) {
    v.x += f.coeffs[off + 2 * i] * vals[i];
    v.y += f.coeffs[off + 2 * i + 1] * vals[i];
  }
  return v;
}

Vec2 evaluate_vector(const Triangulation& tri, const DiscreteField& f,
                     const CellLocation& loc) {
  (void)tri;
  return evaluate_vector(f, loc, ReferenceBasis(f.layout.degree));
}

Vec2 evaluate_scalar_gradient(const Triangulation& tri, const DiscreteField& f,
                              const CellLocation& loc) {
  require_cell_kind(f);
  const ReferenceBasis basis(f.layout.degree);
  const CellMap map = CellMap::from(tri, loc.cell_index);
  const Vec2 ref{loc.barycentric[1], loc.barycentric[2]};
  std::vector<Vec2> grads(basis.dim());
  basis.eval_grad(ref, grads.data());
  Vec2 g{0.0, 0.0};
  const int off = f.layout.offset(loc.cell_index);
  for (int i = 0; i < basis.dim(); ++i) {
    const Vec2 gp = map.grad_to_physical(grads[i]);
    g += gp * f.coeffs[off + i];
  }
  return g;
}

namespace {

template <typename Fn, typename Accum>
DiscreteField project_impl(const Triangulation& tri, const DofLayout& layout,
                           const Fn& fn, Accum accum) {
  if (layout.kind != LayoutKind::CellDiscontinuous) {
    throw std::invalid_argument("project_function needs a cell layout");
  }
  DiscreteField out = DiscreteField::zero(layout);
  const ReferenceBasis basis(layout.degree);
  const TriangleQuadrature quad = triangle_quadrature(2 * layout.degree + 2);
  const Eigen::MatrixXd tab = basis.tabulate(quad.points);
  const int nb = basis.dim();
  Eigen::MatrixXd mass_ref = Eigen::MatrixXd::Zero(nb, nb);
  for (std::size_t q = 0; q < quad.points.size(); ++q) {
    mass_ref += quad.weights[q] * tab.row(q).transpose() * tab.row(q);
  }
  const Eigen::MatrixXd mass_inv = mass_ref.fullPivLu().inverse();
  parallel_for(tri.num_cells(), [&](std::size_t c) {
    const CellMap map = CellMap::from(tri, static_cast<int>(c));
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nb, layout.components);
    for (std::size_t q = 0; q < quad.points.size(); ++q) {
      accum(fn(map.to_physical(quad.points[q])), quad.weights[q], tab, q, rhs);
    }
    const Eigen::MatrixXd sol = mass_inv * rhs;  // detJ cancels
    const int off = layout.offset(static_cast<int>(c));
    for (int i = 0; i < nb; ++i) {
      for (int comp = 0; comp < layout.components; ++comp) {
        out.coeffs[off + i * layout.components + comp] = sol(i, comp);
      }
    }
  });
  return out;
}

}  // namespace

DiscreteField project_function(const Triangulation& tri, const DofLayout& layout,
                               const std::function<double(Vec2)>& fn) {
  if (layout.components != 1) {
    throw std::invalid_argument("scalar projection onto vector layout");
  }
  return project_impl(tri, layout, fn,
                      [](double v, double w, const Eigen::MatrixXd& tab, std::size_t q,
                         Eigen::MatrixXd& rhs) { rhs.col(0) += w * v * tab.row(q).transpose(); });
}

DiscreteField project_function(const Triangulation& tri, const DofLayout& layout,
                               const std::function<Vec2(Vec2)>& fn) {
  if (layout.components != 2) {
    throw std::invalid_argument("vector projection onto scalar layout");
  }
  return project_impl(tri, layout, fn,
                      [](Vec2 v, double w, const Eigen::MatrixXd& tab, std::size_t q,
                         Eigen::MatrixXd& rhs) {
                        rhs.col(0) += w * v.x * tab.row(q).transpose();
                        rhs.col(1) += w * v.y * tab.row(q).transpose();
                      });
}

namespace {

template <typename ErrAtPoint>
double l2_error_impl(const Triangulation& tri, const DiscreteField& f,
                     int quad_exactness, ErrAtPoint err2) {
  if (f.layout.kind != LayoutKind::CellDiscontinuous) {
    throw std::invalid_argument("l2_error needs a cell field");
  }
  const ReferenceBasis basis(f.layout.degree);
  const TriangleQuadrature quad = triangle_quadrature(quad_exactness);
  const Eigen::MatrixXd tab = basis.tabulate(quad.points);
  std::vector<double> cell_sum(tri.num_cells(), 0.0);
  parallel_for(tri.num_cells(), [&](std::size_t c) {
    const CellMap map = CellMap::from(tri, static_cast<int>(c));
    const int off = f.layout.offset(static_cast<int>(c));
    double s = 0.0;
    for (std::size_t q = 0; q < quad.points.size(); ++q) {
      s += quad.weights[q] * map.det * err2(map.to_physical(quad.points[q]), tab, q, off);
    }
    cell_sum[c] = s;
  });
  double total = 0.0;
  for (double s : cell_sum) total += s;
  return std::sqrt(total);
}

}  // namespace

double l2_error(const Triangulation& tri, const DiscreteField& f,
                const std::function<double(Vec2)>& exact, int quad_exactness) {
  return l2_error_impl(tri, f, quad_exactness,
                       [&](Vec2 x, const Eigen::MatrixXd& tab, std::size_t q, int off) {
                         double v = 0.0;
                         for (int i = 0; i < tab.cols(); ++i) {
                           v += f.coeffs[off + i] * tab(q, i);
                         }
                         const double d = v - exact(x);
                         return d * d;
                       });
}

double l2_error(const Triangulation& tri, const DiscreteField& f,
                const std::function<Vec2(Vec2)>& exact, int quad_exactness) {
  return l2_error_impl(tri, f, quad_exactness,
                       [&](Vec2 x, const Eigen::MatrixXd& tab, std::size_t q, int off) {
                         Vec2 v{0.0, 0.0};
                         for (int i = 0; i < tab.cols(); ++i) {
                           v.x += f.coeffs[off + 2 * i] * tab(q, i);
                           v.y += f.coeffs[off + 2 * i + 1] * tab(q, i);
                         }
                         return (v - exact(x)).norm2();
                       });
}

double l2_norm(const Triangulation& tri, const DiscreteField& f) {
  if (f.layout.components == 2) {
    return l2_error(tri, f, std::function<Vec2(Vec2)>([](Vec2) { return Vec2{0.0, 0.0}; }),
                    2 * f.layout.degree + 2);
  }
  return l2_error(tri, f, std::function<double(Vec2)>([](Vec2) { return 0.0; }),
                  2 * f.layout.degree + 2);
}

}  // namespace pmhdg
