#include "pmhdg/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace pmhdg {

double integrate_scalar(const Triangulation& tri, const DiscreteField& f) {
  const ReferenceBasis basis(f.layout.degree);
  const TriangleQuadrature cq = triangle_quadrature(f.layout.degree);
  const Eigen::MatrixXd tab = basis.tabulate(cq.points);
  double total = 0.0;
  for (std::size_t cell = 0; cell < tri.cells.size(); ++cell) {
    const CellMap map = CellMap::from(tri, static_cast<int>(cell));
    for (std::size_t q = 0; q < cq.points.size(); ++q) {
      for (int j = 0; j < basis.dim(); ++j) {
        total += cq.weights[q] * map.det * tab(q, j) *
                 f.coeffs[f.layout.dof(static_cast<int>(cell), j)];
      }
    }
  }
  return total;
}

Vec2 integrate_vector(const Triangulation& tri, const DiscreteField& f) {
  const ReferenceBasis basis(f.layout.degree);
  const TriangleQuadrature cq = triangle_quadrature(f.layout.degree);
  const Eigen::MatrixXd tab = basis.tabulate(cq.points);
  Vec2 total{0.0, 0.0};
  for (std::size_t cell = 0; cell < tri.cells.size(); ++cell) {
    const CellMap map = CellMap::from(tri, static_cast<int>(cell));
    for (std::size_t q = 0; q < cq.points.size(); ++q) {
      for (int j = 0; j < basis.dim(); ++j) {
        const double w = cq.weights[q] * map.det * tab(q, j);
        total.x += w * f.coeffs[f.layout.dof(static_cast<int>(cell), j, 0)];
        total.y += w * f.coeffs[f.layout.dof(static_cast<int>(cell), j, 1)];
      }
    }
  }
  return total;
}

namespace {

/// Shared residual kernel; `ncomp` components are accumulated into separate
/// sums and the returned global value is their Euclidean norm.
ConservationResidual conservation_kernel(const Triangulation& tri,
                                         const DiscreteField& state,
                                         const DiscreteField& star,
                                         const DiscreteField& control,
                                         const AdvectiveField& a,
                                         const ProjectionBC& bc,
                                         const TimeScheme& ts) {
  const int k = state.layout.degree;
  const int ncomp = state.layout.components;
  const ReferenceBasis basis(k);
  const SegmentBasis seg(k);
  const int nb = basis.dim();
  const int nfb = seg.dim();
  const bool mesh_adv = a.cell != nullptr;
  // identical rules to the projection assembly; the residual of a solved
  // step is then exact cancellation, not a quadrature-difference artifact
  const int extra = mesh_adv ? std::max(k, 1) : 1;
  const TriangleQuadrature cq = triangle_quadrature(std::min(12, 2 * k + 2 + extra));
  const SegmentQuadrature fq = segment_quadrature(std::min(12, 2 * k + 1 + extra));
  const Eigen::MatrixXd tab = basis.tabulate(cq.points);
  const Eigen::MatrixXd ftab = seg.tabulate(fq.points);

  ConservationResidual out;
  double global[2] = {0.0, 0.0};
  double local_sq = 0.0;
  for (std::size_t ci = 0; ci < tri.cells.size(); ++ci) {
    const int cell = static_cast<int>(ci);
    const CellMap map = CellMap::from(tri, cell);
    double r[2] = {0.0, 0.0};
    for (std::size_t q = 0; q < cq.points.size(); ++q) {
      for (int j = 0; j < nb; ++j) {
        for (int c = 0; c < ncomp; ++c) {
          const int d = state.layout.dof(cell, j, c);
          r[c] += cq.weights[q] * map.det * tab(q, j) *
                  (state.coeffs[d] - star.coeffs[d]) / ts.dt;
        }
      }
    }
    for (int lf = 0; lf < 3; ++lf) {
      const int f = tri.cell_facets[cell][lf];
      const Facet& fac = tri.facets[f];
      const bool neumann = fac.n_sides == 1 && fac.marker == BoundaryMarker::Neumann;
      const FacetTrace tr = facet_trace(tri, cell, lf, fq.points);
      const Eigen::MatrixXd ctab = basis.tabulate(tr.cell_ref);
      for (std::size_t q = 0; q < fq.points.size(); ++q) {
        const double w = fq.weights[q] * tr.length;
        double an = 0.0;
        if (mesh_adv) {
          Vec2 av{0.0, 0.0};
          for (int m = 0; m < nfb; ++m) {
            av.x += a.facet->coeffs[a.facet->layout.dof(f, m, 0)] * ftab(q, m);
            av.y += a.facet->coeffs[a.facet->layout.dof(f, m, 1)] * ftab(q, m);
          }
          an = av.dot(tr.normal);
        } else if (a.analytic) {
          an = a.analytic(tr.physical[q]).dot(tr.normal);
        }
        if (!neumann) {
          for (int c = 0; c < ncomp; ++c) {
            double cbar = 0.0;
            for (int m = 0; m < nfb; ++m) {
              cbar += control.coeffs[control.layout.dof(f, m, c)] * ftab(q, m);
            }
            r[c] += w * an * cbar;
          }
        } else {
          const double gamma = an < 0.0 ? 1.0 : 0.0;
          Vec2 ha{0.0, 0.0};
          if (ncomp == 1 && bc.h_a) {
            ha.x = bc.h_a(tr.physical[q]);
          } else if (ncomp == 2 && bc.h_a_vec) {
            ha = bc.h_a_vec(tr.physical[q]);
          }
          const double ha_c[2] = {ha.x, ha.y};
          for (int c = 0; c < ncomp; ++c) {
            double sv = 0.0, stv = 0.0;
            for (int j = 0; j < nb; ++j) {
              sv += state.coeffs[state.layout.dof(cell, j, c)] * ctab(q, j);
              stv += star.coeffs[star.layout.dof(cell, j, c)] * ctab(q, j);
            }
            r[c] += w * (ts.theta * (1.0 - gamma) * an * sv + gamma * ha_c[c] +
                         (1.0 - ts.theta) * (1.0 - gamma) * an * stv);
          }
        }
      }
    }
    double rsq = 0.0;
    for (int c = 0; c < ncomp; ++c) {
      global[c] += r[c];
      rsq += r[c] * r[c];
    }
    local_sq += rsq;
  }
  out.global = std::sqrt(global[0] * global[0] + global[1] * global[1]);
  if (ncomp == 1) out.global = global[0];
  out.local_norm = std::sqrt(local_sq);
  return out;
}

}  // namespace

ConservationResidual projection_conservation(const Triangulation& tri,
                                             const DiscreteField& state,
                                             const DiscreteField& star,
                                             const DiscreteField& control,
                                             const AdvectiveField& a,
                                             const ProjectionBC& bc,
                                             const TimeScheme& ts) {
  return conservation_kernel(tri, state, star, control, a, bc, ts);
}

ConservationResidual projection_conservation_vector(const Triangulation& tri,
                                                    const DiscreteField& state,
                                                    const DiscreteField& star,
                                                    const DiscreteField& control,
                                                    const DiscreteField& u_n,
                                                    const DiscreteField& ubar_n,
                                                    const TimeScheme& ts) {
  AdvectiveField a;
  a.cell = &u_n;
  a.facet = &ubar_n;
  return conservation_kernel(tri, state, star, control, a, ProjectionBC{}, ts);
}

Spectrum energy_spectrum(const Triangulation& tri, const DiscreteField& u, int grid_n) {
  if (!tri.periodic_x || !tri.periodic_y) {
    throw std::invalid_argument("energy_spectrum: mesh must be bi-periodic");
  }
  if (grid_n < 2) throw std::invalid_argument("energy_spectrum: grid_n must be >= 2");
  const Box2 box = tri.bounding_box;
  const int n = grid_n;
  const ReferenceBasis basis(u.layout.degree);
  std::vector<Vec2> samples(static_cast<std::size_t>(n) * n);
  int hint = 0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const Vec2 x{box.lo.x + (i + 0.5) * box.width() / n,
                   box.lo.y + (j + 0.5) * box.height() / n};
      const auto loc = locate_cell(tri, x, hint);
      if (!loc) throw std::runtime_error("energy_spectrum: sample point not located");
      hint = loc->cell_index;
      samples[static_cast<std::size_t>(j) * n + i] = evaluate_vector(u, *loc, basis);
    }
  }

  // separable DFT, row pass then column pass
  using cd = std::complex<double>;
  std::vector<cd> fx(samples.size()), fy(samples.size());
  std::vector<cd> rowx(samples.size()), rowy(samples.size());
  std::vector<cd> twiddle(static_cast<std::size_t>(n) * n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      twiddle[static_cast<std::size_t>(a) * n + b] =
          std::polar(1.0, -2.0 * M_PI * a * b / n);
    }
  }
  for (int j = 0; j < n; ++j) {
    for (int ki = 0; ki < n; ++ki) {
      cd sx = 0.0, sy = 0.0;
      for (int i = 0; i < n; ++i) {
        const cd tw = twiddle[static_cast<std::size_t>(ki) * n + i];
        const Vec2& s = samples[static_cast<std::size_t>(j) * n + i];
        sx += s.x * tw;
        sy += s.y * tw;
      }
      rowx[static_cast<std::size_t>(j) * n + ki] = sx;
      rowy[static_cast<std::size_t>(j) * n + ki] = sy;
    }
  }
  for (int ki = 0; ki < n; ++ki) {
    for (int kj = 0; kj < n; ++kj) {
      cd sx = 0.0, sy = 0.0;
      for (int j = 0; j < n; ++j) {
        const cd tw = twiddle[static_cast<std::size_t>(kj) * n + j];
        sx += rowx[static_cast<std::size_t>(j) * n + ki] * tw;
        sy += rowy[static_cast<std::size_t>(j) * n + ki] * tw;
      }
      const double inv = 1.0 / (static_cast<double>(n) * n);
      fx[static_cast<std::size_t>(kj) * n + ki] = sx * inv;
      fy[static_cast<std::size_t>(kj) * n + ki] = sy * inv;
    }
  }

  Spectrum out;
  const int nbins = n / 2 + 1;
  out.wavenumber.resize(nbins);
  out.energy.assign(nbins, 0.0);
  for (int b = 0; b < nbins; ++b) out.wavenumber[b] = b;
  double spectral_sum = 0.0;
  for (int kj = 0; kj < n; ++kj) {
    const int sj = kj <= n / 2 ? kj : kj - n;
    for (int ki = 0; ki < n; ++ki) {
      const int si = ki <= n / 2 ? ki : ki - n;
      const std::size_t idx = static_cast<std::size_t>(kj) * n + ki;
      const double e = 0.5 * (std::norm(fx[idx]) + std::norm(fy[idx]));
      const int bin = static_cast<int>(std::lround(std::hypot(si, sj)));
      if (bin < nbins) out.energy[bin] += e;
      spectral_sum += e;
    }
  }
  double grid_sq = 0.0;
  for (const Vec2& s : samples) grid_sq += s.norm2();
  out.grid_energy = 0.5 * grid_sq / (static_cast<double>(n) * n);
  out.parseval_error =
      out.grid_energy > 0.0 ? std::abs(spectral_sum - out.grid_energy) / out.grid_energy
                            : 0.0;
  return out;
}

double spectrum_slope(const Spectrum& s, double kmin, double kmax) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int count = 0;
  for (std::size_t b = 0; b < s.wavenumber.size(); ++b) {
    const double k = s.wavenumber[b];
    if (k < kmin || k > kmax || s.energy[b] <= 0.0) continue;
    const double lx = std::log10(k);
    const double ly = std::log10(s.energy[b]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++count;
  }
  if (count < 2) throw std::invalid_argument("spectrum_slope: fewer than 2 usable bins");
  const double denom = count * sxx - sx * sx;
  return (count * sxy - sx * sy) / denom;
}

}  // namespace pmhdg
