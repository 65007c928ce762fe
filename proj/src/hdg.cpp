#include "pmhdg/hdg.hpp"

#include <cmath>
#include <stdexcept>

#include "pmhdg/condense.hpp"
#include "pmhdg/parallel.hpp"

namespace pmhdg {

namespace {

constexpr BoundaryMarker kDirichletMarkers[] = {BoundaryMarker::DirichletFull,
                                                BoundaryMarker::DirichletInflowOnly};

std::vector<BoundaryMarker> dirichlet_markers() {
  return {kDirichletMarkers[0], kDirichletMarkers[1]};
}

/// Dirichlet values at the Lagrange nodes of every constrained facet.
DirichletConstraints facet_node_constraints(const Triangulation& tri,
                                            const DofLayout& layout,
                                            const ScalarFn& g, const VectorFn& g_vec) {
  DirichletConstraints out;
  const SegmentBasis seg(layout.degree);
  for (std::size_t f = 0; f < tri.facets.size(); ++f) {
    if (f >= layout.facet_constrained.size() || !layout.facet_constrained[f]) continue;
    const auto [p0, p1] = tri.facet_endpoints(static_cast<int>(f), 0);
    for (int m = 0; m < seg.dim(); ++m) {
      const double s = seg.nodes()[m];
      const Vec2 x{p0.x + s * (p1.x - p0.x), p0.y + s * (p1.y - p0.y)};
      if (layout.components == 1) {
        out.dofs.push_back(layout.dof(static_cast<int>(f), m));
        out.values.push_back(g ? g(x) : 0.0);
      } else {
        const Vec2 v = g_vec ? g_vec(x) : Vec2{0.0, 0.0};
        out.dofs.push_back(layout.dof(static_cast<int>(f), m, 0));
        out.values.push_back(v.x);
        out.dofs.push_back(layout.dof(static_cast<int>(f), m, 1));
        out.values.push_back(v.y);
      }
    }
  }
  return out;
}

/// Facet-wise L2 projection of the averaged cell traces onto the facet space.
DiscreteField facet_trace_average(const Triangulation& tri, const DiscreteField& phi,
                                  const DofLayout& facet_layout) {
  DiscreteField out = DiscreteField::zero(facet_layout);
  const int k = facet_layout.degree;
  const SegmentBasis seg(k);
  const SegmentQuadrature sq = segment_quadrature(2 * k + 2);
  const Eigen::MatrixXd tab = seg.tabulate(sq.points);
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(seg.dim(), seg.dim());
  for (std::size_t q = 0; q < sq.points.size(); ++q) {
    mass += sq.weights[q] * tab.row(q).transpose() * tab.row(q);
  }
  const Eigen::MatrixXd mass_inv = mass.inverse();
  const ReferenceBasis cell_basis(phi.layout.degree);
  for (std::size_t f = 0; f < tri.facets.size(); ++f) {
    const Facet& fac = tri.facets[f];
    if (fac.n_sides == 0) continue;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(seg.dim());
    for (int si = 0; si < fac.n_sides; ++si) {
      const FacetSide& side = fac.sides[si];
      const FacetTrace tr = facet_trace(tri, side.cell, side.local_facet, sq.points);
      for (std::size_t q = 0; q < sq.points.size(); ++q) {
        const Vec2 r = tr.cell_ref[q];
        const CellLocation loc{side.cell, {1.0 - r.x - r.y, r.x, r.y}};
        const double val = evaluate_scalar(phi, loc, cell_basis) / fac.n_sides;
        rhs += sq.weights[q] * val * tab.row(q).transpose();
      }
    }
    const Eigen::VectorXd c = mass_inv * rhs;
    for (int m = 0; m < seg.dim(); ++m) {
      out.coeffs[facet_layout.dof(static_cast<int>(f), m)] = c[m];
    }
  }
  return out;
}

}  // namespace

HdgSystem build_diffusion_system(const Triangulation& tri, const DiscreteField& phi_star,
                                 const ProblemSpec& spec, const TimeScheme& ts) {
  if (!(spec.kappa > 0.0)) {
    throw std::invalid_argument("build_diffusion_system: kappa must be positive");
  }
  if (!(ts.dt > 0.0)) {
    throw std::invalid_argument("build_diffusion_system: dt must be positive");
  }
  const int k = phi_star.layout.degree;
  const DofLayout facet_layout =
      build_layout(tri, LayoutKind::Facet, k, 1, dirichlet_markers());

  const double kappa = spec.kappa;
  const double alpha = spec.alpha > 0.0 ? spec.alpha : 12.0 * k * k;
  const ReferenceBasis basis(k);
  const SegmentBasis seg(k);
  const int nb = basis.dim();
  const int nfb = seg.dim();
  const TriangleQuadrature cq = triangle_quadrature(std::min(12, 2 * k + 2));
  const SegmentQuadrature sq = segment_quadrature(std::min(12, 2 * k + 2));
  const Eigen::MatrixXd tab = basis.tabulate(cq.points);
  const auto [gx, gy] = basis.tabulate_grad(cq.points);
  const Eigen::MatrixXd ftab = seg.tabulate(sq.points);

  const int ncells = static_cast<int>(tri.cells.size());
  std::vector<LocalSystem> locals(ncells);
  parallel_for(static_cast<std::size_t>(ncells), [&](std::size_t ci) {
    const int cell = static_cast<int>(ci);
    const CellMap map = CellMap::from(tri, cell);
    const double hk = tri.h_per_cell[cell];
    LocalSystem& ls = locals[ci];
    ls.cell = cell;
    ls.A_ll = Eigen::MatrixXd::Zero(nb, nb);
    ls.A_lg = Eigen::MatrixXd::Zero(nb, 3 * nfb);
    ls.A_gl = Eigen::MatrixXd::Zero(3 * nfb, nb);
    ls.A_gg = Eigen::MatrixXd::Zero(3 * nfb, 3 * nfb);
    ls.b_l = Eigen::VectorXd::Zero(nb);
    ls.b_g = Eigen::VectorXd::Zero(3 * nfb);
    ls.local_dofs.resize(nb);
    for (int i = 0; i < nb; ++i) ls.local_dofs[i] = phi_star.layout.dof(cell, i);
    ls.facet_dofs.resize(3 * nfb);
    for (int lf = 0; lf < 3; ++lf) {
      const int f = tri.cell_facets[cell][lf];
      for (int m = 0; m < nfb; ++m) ls.facet_dofs[lf * nfb + m] = facet_layout.dof(f, m);
    }

    for (std::size_t q = 0; q < cq.points.size(); ++q) {
      const double w = cq.weights[q] * map.det;
      const Vec2 xq = map.to_physical(cq.points[q]);
      double star = 0.0;
      for (int j = 0; j < nb; ++j) star += phi_star.coeffs[ls.local_dofs[j]] * tab(q, j);
      const double src = (spec.f ? spec.f(xq) : 0.0) + star / ts.dt;
      Vec2 grads[16];
      for (int j = 0; j < nb; ++j) {
        grads[j] = map.grad_to_physical({gx(q, j), gy(q, j)});
      }
      for (int i = 0; i < nb; ++i) {
        ls.b_l[i] += w * src * tab(q, i);
        for (int j = 0; j < nb; ++j) {
          ls.A_ll(i, j) += w * (tab(q, i) * tab(q, j) / ts.dt +
                                kappa * grads[i].dot(grads[j]));
        }
      }
    }

    for (int lf = 0; lf < 3; ++lf) {
      const int f = tri.cell_facets[cell][lf];
      const BoundaryMarker marker = tri.facets[f].marker;
      const bool neumann = tri.facets[f].n_sides == 1 && marker == BoundaryMarker::Neumann;
      const FacetTrace tr = facet_trace(tri, cell, lf, sq.points);
      const Eigen::MatrixXd ctab = basis.tabulate(tr.cell_ref);
      const auto [cgx, cgy] = basis.tabulate_grad(tr.cell_ref);
      for (std::size_t q = 0; q < sq.points.size(); ++q) {
        const double w = sq.weights[q] * tr.length;
        double nval[16], ngrad[16];
        for (int j = 0; j < nb; ++j) {
          nval[j] = ctab(q, j);
          ngrad[j] = map.grad_to_physical({cgx(q, j), cgy(q, j)}).dot(tr.normal);
        }
        for (int i = 0; i < nb; ++i) {
          for (int j = 0; j < nb; ++j) {
            ls.A_ll(i, j) += w * kappa * (alpha / hk * nval[i] * nval[j] -
                                          nval[i] * ngrad[j] - ngrad[i] * nval[j]);
          }
          for (int m = 0; m < nfb; ++m) {
            const double coupling =
                w * kappa * (ngrad[i] - alpha / hk * nval[i]) * ftab(q, m);
            ls.A_lg(i, lf * nfb + m) += coupling;
            ls.A_gl(lf * nfb + m, i) += coupling;
          }
        }
        for (int m = 0; m < nfb; ++m) {
          for (int mm = 0; mm < nfb; ++mm) {
            ls.A_gg(lf * nfb + m, lf * nfb + mm) +=
                w * kappa * alpha / hk * ftab(q, m) * ftab(q, mm);
          }
          if (neumann && spec.h_d) {
            ls.b_g[lf * nfb + m] -= w * spec.h_d(tr.physical[q]) * ftab(q, m);
          }
        }
      }
    }
  });

  HdgSystem out;
  out.locals = std::move(locals);
  out.constraints = facet_node_constraints(tri, facet_layout, spec.g, spec.g_vec);
  out.num_local_dofs = phi_star.layout.num_dofs;
  out.num_facet_dofs = facet_layout.num_dofs;
  return out;
}

std::pair<DiscreteField, DiscreteField> diffusion_step(const Triangulation& tri,
                                                       const DiscreteField& phi_star,
                                                       const ProblemSpec& spec,
                                                       const TimeScheme& ts) {
  if (spec.kappa < 0.0) throw std::invalid_argument("diffusion_step: kappa < 0");
  if (!(ts.dt > 0.0)) throw std::invalid_argument("diffusion_step: dt must be positive");
  const DofLayout facet_layout = build_layout(tri, LayoutKind::Facet,
                                              phi_star.layout.degree, 1,
                                              dirichlet_markers());

  if (spec.kappa == 0.0) {
    DiscreteField phi = phi_star;
    return {phi, facet_trace_average(tri, phi_star, facet_layout)};
  }

  const HdgSystem blocks = build_diffusion_system(tri, phi_star, spec, ts);
  CondensedSystem sys = condense(blocks.locals, blocks.num_facet_dofs, blocks.constraints);
  const Eigen::VectorXd facet_sol = solve_global(sys);
  const Eigen::VectorXd local_sol = back_substitute(sys, facet_sol, blocks.num_local_dofs);

  DiscreteField phi = DiscreteField::zero(phi_star.layout);
  phi.coeffs = local_sol;
  DiscreteField phibar = DiscreteField::zero(facet_layout);
  phibar.coeffs = facet_sol;
  return {phi, phibar};
}

HdgSystem build_stokes_system(const Triangulation& tri, const DiscreteField& u_star,
                              const ProblemSpec& spec, const TimeScheme& ts) {
  if (!(spec.nu > 0.0)) {
    throw std::invalid_argument("build_stokes_system: nu must be positive");
  }
  if (!(ts.dt > 0.0)) {
    throw std::invalid_argument("build_stokes_system: dt must be positive");
  }
  const int k = u_star.layout.degree;
  if (k < 1) {
    throw std::invalid_argument("build_stokes_system: velocity degree must be >= 1");
  }
  const double nu = spec.nu;
  const double alpha = spec.alpha > 0.0 ? spec.alpha : 6.0 * k * k;

  const DofLayout& v_layout = u_star.layout;
  const DofLayout q_layout = build_layout(tri, LayoutKind::CellDiscontinuous, k - 1, 1);
  const DofLayout vbar_layout =
      build_layout(tri, LayoutKind::Facet, k, 2, dirichlet_markers());
  const DofLayout pbar_layout = build_layout(tri, LayoutKind::Facet, k, 1);

  const ReferenceBasis basis(k);
  const ReferenceBasis pbasis(k - 1);
  const SegmentBasis seg(k);
  const int nb = basis.dim();
  const int np = pbasis.dim();
  const int nfb = seg.dim();
  const int nl = 2 * nb + np;          // cell dofs: u interleaved, then p
  const int nfu = 2 * nfb;             // facet velocity dofs per facet
  const int nf = 3 * (nfu + nfb);      // ubar blocks first, then pbar blocks
  const TriangleQuadrature cq = triangle_quadrature(std::min(12, 2 * k + 2));
  const SegmentQuadrature sq = segment_quadrature(std::min(12, 2 * k + 2));
  const Eigen::MatrixXd tab = basis.tabulate(cq.points);
  const auto [gx, gy] = basis.tabulate_grad(cq.points);
  const Eigen::MatrixXd ptab = pbasis.tabulate(cq.points);
  const Eigen::MatrixXd ftab = seg.tabulate(sq.points);

  const int ncells = static_cast<int>(tri.cells.size());
  std::vector<LocalSystem> locals(ncells);
  parallel_for(static_cast<std::size_t>(ncells), [&](std::size_t ci) {
    const int cell = static_cast<int>(ci);
    const CellMap map = CellMap::from(tri, cell);
    const double hk = tri.h_per_cell[cell];
    LocalSystem& ls = locals[ci];
    ls.cell = cell;
    ls.A_ll = Eigen::MatrixXd::Zero(nl, nl);
    ls.A_lg = Eigen::MatrixXd::Zero(nl, nf);
    ls.A_gl = Eigen::MatrixXd::Zero(nf, nl);
    ls.A_gg = Eigen::MatrixXd::Zero(nf, nf);
    ls.b_l = Eigen::VectorXd::Zero(nl);
    ls.b_g = Eigen::VectorXd::Zero(nf);
    ls.local_dofs.resize(nl);
    for (int j = 0; j < nb; ++j) {
      ls.local_dofs[2 * j] = v_layout.dof(cell, j, 0);
      ls.local_dofs[2 * j + 1] = v_layout.dof(cell, j, 1);
    }
    for (int m = 0; m < np; ++m) {
      ls.local_dofs[2 * nb + m] = v_layout.num_dofs + q_layout.dof(cell, m);
    }
    ls.facet_dofs.resize(nf);
    for (int lf = 0; lf < 3; ++lf) {
      const int f = tri.cell_facets[cell][lf];
      for (int m = 0; m < nfb; ++m) {
        ls.facet_dofs[lf * nfu + 2 * m] = vbar_layout.dof(f, m, 0);
        ls.facet_dofs[lf * nfu + 2 * m + 1] = vbar_layout.dof(f, m, 1);
        ls.facet_dofs[3 * nfu + lf * nfb + m] =
            vbar_layout.num_dofs + pbar_layout.dof(f, m);
      }
    }
    const auto udof = [&](int j, int c) { return 2 * j + c; };
    const auto pdof = [&](int m) { return 2 * nb + m; };
    const auto ubardof = [&](int lf, int m, int c) { return lf * nfu + 2 * m + c; };
    const auto pbardof = [&](int lf, int m) { return 3 * nfu + lf * nfb + m; };

    for (std::size_t q = 0; q < cq.points.size(); ++q) {
      const double w = cq.weights[q] * map.det;
      const Vec2 xq = map.to_physical(cq.points[q]);
      Vec2 star{0.0, 0.0};
      for (int j = 0; j < nb; ++j) {
        star.x += u_star.coeffs[ls.local_dofs[udof(j, 0)]] * tab(q, j);
        star.y += u_star.coeffs[ls.local_dofs[udof(j, 1)]] * tab(q, j);
      }
      Vec2 src = spec.f_vec ? spec.f_vec(xq) : Vec2{0.0, 0.0};
      src += star / ts.dt;
      Vec2 grads[16];
      for (int j = 0; j < nb; ++j) {
        grads[j] = map.grad_to_physical({gx(q, j), gy(q, j)});
      }
      for (int i = 0; i < nb; ++i) {
        ls.b_l[udof(i, 0)] += w * src.x * tab(q, i);
        ls.b_l[udof(i, 1)] += w * src.y * tab(q, i);
        for (int j = 0; j < nb; ++j) {
          const double mass = tab(q, i) * tab(q, j) / ts.dt;
          const double lap = grads[i].dot(grads[j]);
          const double gi[2] = {grads[i].x, grads[i].y};
          const double gj[2] = {grads[j].x, grads[j].y};
          for (int c = 0; c < 2; ++c) {
            for (int d = 0; d < 2; ++d) {
              double a = nu * gj[c] * gi[d];  // 2*nu grad^s u : grad^s w, cross part
              if (c == d) a += mass + nu * lap;
              ls.A_ll(udof(i, c), udof(j, d)) += w * a;
            }
          }
        }
        for (int m = 0; m < np; ++m) {
          // -int p div(w) and the mass rows -int div(u) q, which equal the
          // integrated-by-parts form of the mass balance for exact quadrature
          ls.A_ll(udof(i, 0), pdof(m)) -= w * ptab(q, m) * grads[i].x;
          ls.A_ll(udof(i, 1), pdof(m)) -= w * ptab(q, m) * grads[i].y;
          ls.A_ll(pdof(m), udof(i, 0)) -= w * ptab(q, m) * grads[i].x;
          ls.A_ll(pdof(m), udof(i, 1)) -= w * ptab(q, m) * grads[i].y;
        }
      }
    }

    for (int lf = 0; lf < 3; ++lf) {
      const int f = tri.cell_facets[cell][lf];
      const Facet& fac = tri.facets[f];
      const bool boundary = fac.n_sides == 1;
      const bool neumann = boundary && fac.marker == BoundaryMarker::Neumann;
      const FacetTrace tr = facet_trace(tri, cell, lf, sq.points);
      const Eigen::MatrixXd ctab = basis.tabulate(tr.cell_ref);
      const auto [cgx, cgy] = basis.tabulate_grad(tr.cell_ref);
      const double n[2] = {tr.normal.x, tr.normal.y};
      for (std::size_t q = 0; q < sq.points.size(); ++q) {
        const double w = sq.weights[q] * tr.length;
        double nval[16], ngrad[16];
        Vec2 grads[16];
        for (int j = 0; j < nb; ++j) {
          nval[j] = ctab(q, j);
          grads[j] = map.grad_to_physical({cgx(q, j), cgy(q, j)});
          ngrad[j] = grads[j].dot(tr.normal);
        }
        for (int i = 0; i < nb; ++i) {
          const double gi[2] = {grads[i].x, grads[i].y};
          for (int j = 0; j < nb; ++j) {
            const double gj[2] = {grads[j].x, grads[j].y};
            for (int c = 0; c < 2; ++c) {
              for (int d = 0; d < 2; ++d) {
                // -2nu (grad^s u n).w - 2nu u.(grad^s w n) + 2nu alpha/h u.w
                double a = -nu * ((c == d ? ngrad[j] : 0.0) + gj[c] * n[d]) * nval[i];
                a -= nu * ((c == d ? ngrad[i] : 0.0) + gi[d] * n[c]) * nval[j];
                if (c == d) a += 2.0 * nu * alpha / hk * nval[i] * nval[j];
                ls.A_ll(udof(i, c), udof(j, d)) += w * a;
              }
            }
          }
          for (int m = 0; m < nfb; ++m) {
            for (int c = 0; c < 2; ++c) {
              for (int d = 0; d < 2; ++d) {
                double a = nu * ((c == d ? ngrad[i] : 0.0) + gi[d] * n[c]) * ftab(q, m);
                if (c == d) a -= 2.0 * nu * alpha / hk * nval[i] * ftab(q, m);
                ls.A_lg(udof(i, c), ubardof(lf, m, d)) += w * a;
                ls.A_gl(ubardof(lf, m, d), udof(i, c)) += w * a;
              }
            }
            // +pbar (n.w) in the momentum rows; -(mirrored) in the negated
            // global momentum rows
            for (int c = 0; c < 2; ++c) {
              ls.A_lg(udof(i, c), pbardof(lf, m)) += w * ftab(q, m) * n[c] * nval[i];
            }
          }
          // global mass: sum_K int (u.n) qbar
          for (int m = 0; m < nfb; ++m) {
            for (int c = 0; c < 2; ++c) {
              ls.A_gl(pbardof(lf, m), udof(i, c)) += w * ftab(q, m) * n[c] * nval[i];
            }
          }
        }
        for (int m = 0; m < nfb; ++m) {
          for (int mm = 0; mm < nfb; ++mm) {
            for (int c = 0; c < 2; ++c) {
              ls.A_gg(ubardof(lf, m, c), ubardof(lf, mm, c)) +=
                  w * 2.0 * nu * alpha / hk * ftab(q, m) * ftab(q, mm);
              // negated global momentum: -pbar (n.wbar)
              ls.A_gg(ubardof(lf, m, c), pbardof(lf, mm)) -=
                  w * ftab(q, mm) * n[c] * ftab(q, m);
            }
            if (boundary) {
              // global mass: -int_boundary (ubar.n) qbar
              for (int c = 0; c < 2; ++c) {
                ls.A_gg(pbardof(lf, m), ubardof(lf, mm, c)) -=
                    w * ftab(q, mm) * n[c] * ftab(q, m);
              }
            }
          }
          if (neumann && spec.h_d_vec) {
            const Vec2 hd = spec.h_d_vec(tr.physical[q]);
            ls.b_g[ubardof(lf, m, 0)] -= w * hd.x * ftab(q, m);
            ls.b_g[ubardof(lf, m, 1)] -= w * hd.y * ftab(q, m);
          }
        }
      }
    }
  });

  DirichletConstraints constraints =
      facet_node_constraints(tri, vbar_layout, spec.g, spec.g_vec);
  bool has_neumann = false;
  for (const Facet& fac : tri.facets) {
    if (fac.n_sides == 1 && fac.marker == BoundaryMarker::Neumann) has_neumann = true;
  }
  if (!has_neumann) {
    // pressure gauge: pin one pressure-trace dof, mean-correct afterwards
    int pin = -1;
    for (std::size_t f = 0; f < tri.facets.size(); ++f) {
      if (tri.facets[f].n_sides >= 1) {
        pin = vbar_layout.num_dofs + pbar_layout.dof(static_cast<int>(f), 0);
        break;
      }
    }
    constraints.dofs.push_back(pin);
    constraints.values.push_back(0.0);
  }

  HdgSystem out;
  out.locals = std::move(locals);
  out.constraints = std::move(constraints);
  out.num_local_dofs = v_layout.num_dofs + q_layout.num_dofs;
  out.num_facet_dofs = vbar_layout.num_dofs + pbar_layout.num_dofs;
  return out;
}

StokesSolution stokes_step(const Triangulation& tri, const DiscreteField& u_star,
                           const ProblemSpec& spec, const TimeScheme& ts) {
  const HdgSystem blocks = build_stokes_system(tri, u_star, spec, ts);

  const int k = u_star.layout.degree;
  const DofLayout& v_layout = u_star.layout;
  const DofLayout q_layout = build_layout(tri, LayoutKind::CellDiscontinuous, k - 1, 1);
  const DofLayout vbar_layout =
      build_layout(tri, LayoutKind::Facet, k, 2, dirichlet_markers());
  const DofLayout pbar_layout = build_layout(tri, LayoutKind::Facet, k, 1);
  const ReferenceBasis pbasis(k - 1);
  const SegmentBasis seg(k);
  const int np = pbasis.dim();
  const int nfb = seg.dim();
  const int ncells = static_cast<int>(tri.cells.size());
  const TriangleQuadrature cq = triangle_quadrature(std::min(12, 2 * k + 2));
  const Eigen::MatrixXd ptab = pbasis.tabulate(cq.points);
  bool has_neumann = false;
  for (const Facet& fac : tri.facets) {
    if (fac.n_sides == 1 && fac.marker == BoundaryMarker::Neumann) has_neumann = true;
  }

  CondensedSystem sys = condense(blocks.locals, blocks.num_facet_dofs, blocks.constraints);
  const Eigen::VectorXd facet_sol = solve_global(sys);
  const Eigen::VectorXd local_sol = back_substitute(sys, facet_sol, blocks.num_local_dofs);

  StokesSolution sol;
  sol.u = DiscreteField::zero(v_layout);
  sol.u.coeffs = local_sol.head(v_layout.num_dofs);
  sol.p = DiscreteField::zero(q_layout);
  sol.p.coeffs = local_sol.tail(q_layout.num_dofs);
  sol.ubar = DiscreteField::zero(vbar_layout);
  sol.ubar.coeffs = facet_sol.head(vbar_layout.num_dofs);
  sol.pbar = DiscreteField::zero(pbar_layout);
  sol.pbar.coeffs = facet_sol.tail(pbar_layout.num_dofs);

  if (!has_neumann) {
    double p_int = 0.0, area = 0.0;
    for (int cell = 0; cell < ncells; ++cell) {
      const CellMap map = CellMap::from(tri, cell);
      for (std::size_t q = 0; q < cq.points.size(); ++q) {
        double pv = 0.0;
        for (int m = 0; m < np; ++m) {
          pv += sol.p.coeffs[q_layout.dof(cell, m)] * ptab(q, m);
        }
        p_int += cq.weights[q] * map.det * pv;
        area += cq.weights[q] * map.det;
      }
    }
    sol.p.coeffs.array() -= p_int / area;
    double pb_int = 0.0, len = 0.0;
    for (std::size_t f = 0; f < tri.facets.size(); ++f) {
      if (tri.facets[f].n_sides == 0) continue;
      const auto [p0, p1] = tri.facet_endpoints(static_cast<int>(f), 0);
      const double L = (p1 - p0).norm();
      const SegmentQuadrature fq = segment_quadrature(k);
      for (std::size_t q = 0; q < fq.points.size(); ++q) {
        double pv = 0.0;
        double fv[16];
        seg.eval(fq.points[q], fv);
        for (int m = 0; m < nfb; ++m) {
          pv += sol.pbar.coeffs[pbar_layout.dof(static_cast<int>(f), m)] * fv[m];
        }
        pb_int += fq.weights[q] * L * pv;
        len += fq.weights[q] * L;
      }
    }
    sol.pbar.coeffs.array() -= pb_int / len;
  }
  return sol;
}

double divergence_infnorm(const Triangulation& tri, const DiscreteField& u) {
  const int k = u.layout.degree;
  const ReferenceBasis basis(k);
  const int nb = basis.dim();
  const TriangleQuadrature cq = triangle_quadrature(std::min(12, 2 * k + 2));
  const auto [gx, gy] = basis.tabulate_grad(cq.points);
  double worst = 0.0;
  for (std::size_t cell = 0; cell < tri.cells.size(); ++cell) {
    const CellMap map = CellMap::from(tri, static_cast<int>(cell));
    for (std::size_t q = 0; q < cq.points.size(); ++q) {
      double div = 0.0;
      for (int j = 0; j < nb; ++j) {
        const Vec2 g = map.grad_to_physical({gx(q, j), gy(q, j)});
        div += u.coeffs[u.layout.dof(static_cast<int>(cell), j, 0)] * g.x +
               u.coeffs[u.layout.dof(static_cast<int>(cell), j, 1)] * g.y;
      }
      worst = std::max(worst, std::abs(div));
    }
  }
  return worst;
}

double normal_jump_infnorm(const Triangulation& tri, const DiscreteField& u) {
  const ReferenceBasis basis(u.layout.degree);
  const SegmentQuadrature sq = segment_quadrature(std::min(12, 2 * u.layout.degree + 2));
  double worst = 0.0;
  for (std::size_t f = 0; f < tri.facets.size(); ++f) {
    const Facet& fac = tri.facets[f];
    if (fac.n_sides != 2) continue;
    const FacetTrace tr0 = facet_trace(tri, fac.sides[0].cell, fac.sides[0].local_facet,
                                       sq.points);
    const FacetTrace tr1 = facet_trace(tri, fac.sides[1].cell, fac.sides[1].local_facet,
                                       sq.points);
    for (std::size_t q = 0; q < sq.points.size(); ++q) {
      const Vec2 r0 = tr0.cell_ref[q];
      const Vec2 r1 = tr1.cell_ref[q];
      const Vec2 u0 = evaluate_vector(
          u, {fac.sides[0].cell, {1.0 - r0.x - r0.y, r0.x, r0.y}}, basis);
      const Vec2 u1 = evaluate_vector(
          u, {fac.sides[1].cell, {1.0 - r1.x - r1.y, r1.x, r1.y}}, basis);
      worst = std::max(worst, std::abs(u0.dot(tr0.normal) + u1.dot(tr1.normal)));
    }
  }
  return worst;
}

}  // namespace pmhdg
