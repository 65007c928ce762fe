#pragma once

#include <vector>

#include "pmhdg/mesh.hpp"
#include "pmhdg/projection.hpp"
#include "pmhdg/spaces.hpp"

namespace pmhdg {

double integrate_scalar(const Triangulation& tri, const DiscreteField& f);
Vec2 integrate_vector(const Triangulation& tri, const DiscreteField& f);

/// Cellwise residuals of the discrete conservation statement of one
/// projection step,
///   r_K = int_K (psi^{n+1} - psi^{*,n})/dt
///       + oint_{dK \ GN} (a.n) psibar
///       + oint_{dK on GN} [theta(1-gamma)(a.n)psi + gamma h_a
///                          + (1-theta)(1-gamma)(a.n)psi*],
/// evaluated with the projection's own quadrature rules so a solved step
/// reproduces zero to machine precision. `global` is sum_K r_K and
/// `local_norm` is the l2 norm of the r_K.
struct ConservationResidual {
  double global = 0.0;
  double local_norm = 0.0;
};

ConservationResidual projection_conservation(const Triangulation& tri,
                                             const DiscreteField& state,
                                             const DiscreteField& star,
                                             const DiscreteField& control,
                                             const AdvectiveField& a,
                                             const ProjectionBC& bc,
                                             const TimeScheme& ts);

/// Componentwise counterpart for the vector projection; returns the residual
/// of the summed x and y statements (global = |(sum r_x, sum r_y)|).
ConservationResidual projection_conservation_vector(const Triangulation& tri,
                                                    const DiscreteField& state,
                                                    const DiscreteField& star,
                                                    const DiscreteField& control,
                                                    const DiscreteField& u_n,
                                                    const DiscreteField& ubar_n,
                                                    const TimeScheme& ts);

/// Radially binned kinetic-energy spectrum of a vector field on a bi-periodic
/// rectangle: sample on a uniform grid_n x grid_n lattice, 2D DFT, energy per
/// integer wavenumber-magnitude bin. Throws on non-bi-periodic meshes.
struct Spectrum {
  std::vector<double> wavenumber;  // bin centers, in units of 2*pi/L
  std::vector<double> energy;      // binned E(k), sum equals grid energy
  double grid_energy = 0.0;        // (1/2)<|u|^2> over the sample lattice
  double parseval_error = 0.0;     // |sum E - grid_energy| / grid_energy
};

Spectrum energy_spectrum(const Triangulation& tri, const DiscreteField& u, int grid_n);

/// Least-squares slope of log10 E vs log10 k over bins with kmin <= k <= kmax.
double spectrum_slope(const Spectrum& s, double kmin, double kmax);

}  // namespace pmhdg
