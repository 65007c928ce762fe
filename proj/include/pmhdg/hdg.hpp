#pragma once

#include <utility>

#include "pmhdg/mesh.hpp"
#include "pmhdg/particles.hpp"
#include "pmhdg/projection.hpp"
#include "pmhdg/spaces.hpp"

namespace pmhdg {

/// Problem data for the Eulerian steps. alpha = 0 selects the defaults
/// 12k^2 (diffusion) and 6k^2 (Stokes).
struct ProblemSpec {
  double kappa = 0.0;  // diffusivity, scalar problems
  double nu = 0.0;     // kinematic viscosity, flow problems
  ScalarFn f;          // source
  VectorFn f_vec;      // body force
  ScalarFn g;          // Dirichlet data
  VectorFn g_vec;
  ScalarFn h_d;        // diffusive Neumann data
  VectorFn h_d_vec;
  double alpha = 0.0;  // interior penalty constant
};

struct StokesSolution {
  DiscreteField u;     // vector, degree k, H(div)-conforming
  DiscreteField ubar;  // vector facet field
  DiscreteField p;     // scalar, degree k-1
  DiscreteField pbar;  // scalar facet field, degree k
};

/// Backward-Euler interior-penalty step for the diffusion equation. Returns
/// (phi, phibar). kappa = 0 degenerates to the identity on phi with phibar
/// the facet average of the traces.
std::pair<DiscreteField, DiscreteField> diffusion_step(const Triangulation& tri,
                                                       const DiscreteField& phi_star,
                                                       const ProblemSpec& spec,
                                                       const TimeScheme& ts);

/// Backward-Euler step for the unsteady Stokes equations with an
/// H(div)-conforming, pointwise divergence-free velocity. Without Neumann
/// facets one pressure-trace dof is pinned and the pressure is mean-corrected.
StokesSolution stokes_step(const Triangulation& tri, const DiscreteField& u_star,
                           const ProblemSpec& spec, const TimeScheme& ts);

/// Assembled cell-local block systems of one Eulerian step, exposed so tests
/// can compare the condensation pipeline against the monolithic dense oracle.
struct HdgSystem {
  std::vector<LocalSystem> locals;
  DirichletConstraints constraints;
  int num_local_dofs = 0;
  int num_facet_dofs = 0;
};

/// Blocks of the backward-Euler diffusion step (requires kappa > 0).
HdgSystem build_diffusion_system(const Triangulation& tri, const DiscreteField& phi_star,
                                 const ProblemSpec& spec, const TimeScheme& ts);

/// Blocks of the backward-Euler Stokes step. Local dofs order the velocity
/// first and the cell pressures after; facet dofs order the velocity traces
/// first and the pressure traces after.
HdgSystem build_stokes_system(const Triangulation& tri, const DiscreteField& u_star,
                              const ProblemSpec& spec, const TimeScheme& ts);

/// Max of |du_x/dx + du_y/dy| over all cell quadrature points.
double divergence_infnorm(const Triangulation& tri, const DiscreteField& u);

/// Max over interior facets of the normal-velocity jump at facet quadrature
/// points (H(div) conformity diagnostic).
double normal_jump_infnorm(const Triangulation& tri, const DiscreteField& u);

}  // namespace pmhdg
