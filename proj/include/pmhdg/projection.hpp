#pragma once

#include <functional>

#include "pmhdg/condense.hpp"
#include "pmhdg/mesh.hpp"
#include "pmhdg/particles.hpp"
#include "pmhdg/spaces.hpp"

namespace pmhdg {

struct TimeScheme {
  double dt = 0.0;
  double theta = 0.5;           // in [1/2, 1]
  double theta_L = 0.5;         // in [1/2, 1]
  double beta = 1e-6;           // facet jump penalty
  int multiplier_degree = 0;    // l in {0, 1}
};

/// Solution triple of the constrained particle-mesh projection: the cell
/// field, the Lagrange multiplier (cell field of the multiplier degree) and
/// the facet control variable.
struct ProjectionResult {
  DiscreteField state;
  DiscreteField multiplier;
  DiscreteField control;
};

/// Advective field of the scalar projection: either an analytic velocity or
/// a pair of mesh fields (cell velocity and its facet counterpart). With mesh
/// fields the facet-normal velocity comes from the facet field, which is
/// single-valued by construction.
struct AdvectiveField {
  std::function<Vec2(Vec2)> analytic;
  const DiscreteField* cell = nullptr;   // vector field, degree k
  const DiscreteField* facet = nullptr;  // vector facet field

  bool is_zero() const { return !analytic && cell == nullptr; }
};

/// Boundary data for a projection step. Dirichlet data g constrains the facet
/// control (to its facetwise L2 projection) on every DirichletFull facet, and
/// on DirichletInflowOnly facets carrying net inflow (mean a.n < 0); with a
/// zero advective field the control is left free. The advective Neumann flux
/// h_a must already be evaluated at the theta-interpolated time level.
struct ProjectionBC {
  ScalarFn g;
  VectorFn g_vec;
  ScalarFn h_a;
  VectorFn h_a_vec;
};

/// Cellwise least-squares projection of the particle payload selected by the
/// layout's component count. Throws a unisolvency error naming the cell when
/// a cell has fewer particles than cell basis functions or its normal-matrix
/// condition estimate exceeds 1e12.
DiscreteField l2_project(const Triangulation& tri, const ParticleSet& set,
                         const DofLayout& layout);

/// psi*,n = psi^n + dt*((1-theta_L)*incr_nm1 + theta_L*incr_n).
DiscreteField intermediate_field(const DiscreteField& psi_n,
                                 const DiscreteField& incr_nm1,
                                 const DiscreteField& incr_n, const TimeScheme& ts);

/// (phi^m - phi*,m-1)/dt, coefficientwise.
DiscreteField field_increment(const DiscreteField& phi_m,
                              const DiscreteField& phi_star_mm1, double dt);

/// Scalar PDE-constrained projection: find (psi, lambda, psi_bar) from the
/// particle payload and the intermediate field, by static condensation onto
/// the facet control and back-substitution.
ProjectionResult constrained_project_scalar(const Triangulation& tri,
                                            const ParticleSet& set,
                                            const DiscreteField& psi_star,
                                            const AdvectiveField& a,
                                            const ProjectionBC& bc,
                                            const TimeScheme& ts);

/// Vector counterpart, advected by the Stokes velocities frozen at t^n. The
/// system decouples per component; both components share one condensed matrix.
ProjectionResult constrained_project_vector(const Triangulation& tri,
                                            const ParticleSet& set,
                                            const DiscreteField& v_star,
                                            const DiscreteField& u_n,
                                            const DiscreteField& ubar_n,
                                            const ProjectionBC& bc,
                                            const TimeScheme& ts);

/// Update particle payloads from the mesh increments:
/// psi_p += dt*((1-theta_L)*incr_n(x_p^n) + theta_L*incr_np1(x_p^{n+1})).
/// Uses x_old/host_old for the old-time evaluation.
void mesh_particle_update(ParticleSet& set, const Triangulation& tri,
                          const DiscreteField& incr_n, const DiscreteField& incr_np1,
                          const TimeScheme& ts);

/// Alive particle indices per cell, in particle order.
std::vector<std::vector<int>> particles_by_cell(const ParticleSet& set,
                                                const Triangulation& tri);

/// The local/condensed systems of the scalar projection, exposed so tests can
/// compare the pipeline against the monolithic oracle and check
/// theta-independence of the assembled blocks for l=0. The multiplier dofs of
/// the assembled system are in units of lambda/beta (see the scaling note in
/// the implementation); constrained_project_* undo the scaling.
struct ProjectionSystem {
  std::vector<LocalSystem> locals;
  DirichletConstraints constraints;
  int num_local_dofs = 0;   // psi block first, then lambda block
  int num_facet_dofs = 0;
  int num_psi_dofs = 0;
};

ProjectionSystem build_scalar_projection_system(const Triangulation& tri,
                                                const ParticleSet& set,
                                                const DiscreteField& psi_star,
                                                const AdvectiveField& a,
                                                const ProjectionBC& bc,
                                                const TimeScheme& ts);

ProjectionSystem build_vector_projection_system(const Triangulation& tri,
                                                const ParticleSet& set,
                                                const DiscreteField& v_star,
                                                const DiscreteField& u_n,
                                                const DiscreteField& ubar_n,
                                                const ProjectionBC& bc,
                                                const TimeScheme& ts);

}  // namespace pmhdg
