#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

#include "pmhdg/mesh.hpp"

namespace pmhdg {

/// Lagrange basis of P_k on the reference triangle (0,0)-(1,0)-(0,1),
/// nodes on the uniform lattice (i/k, j/k). Degree 0 uses the centroid.
class ReferenceBasis {
 public:
  explicit ReferenceBasis(int degree);  // degree in 0..4

  int degree() const { return degree_; }
  int dim() const { return static_cast<int>(nodes_.size()); }
  const std::vector<Vec2>& nodes() const { return nodes_; }

  void eval(const Vec2& p, double* values) const;
  void eval_grad(const Vec2& p, Vec2* grads) const;

  /// Values at many points; row = point, column = basis function.
  Eigen::MatrixXd tabulate(const std::vector<Vec2>& pts) const;
  /// Reference gradients at many points: (d/dx table, d/dy table).
  std::pair<Eigen::MatrixXd, Eigen::MatrixXd> tabulate_grad(
      const std::vector<Vec2>& pts) const;

 private:
  int degree_;
  std::vector<Vec2> nodes_;
  Eigen::MatrixXd coeff_;  // column i: monomial coefficients of basis i
};

/// Lagrange basis of P_k on the reference segment [0,1], nodes i/k
/// (midpoint for degree 0).
class SegmentBasis {
 public:
  explicit SegmentBasis(int degree);  // degree in 0..4

  int degree() const { return degree_; }
  int dim() const { return degree_ + 1; }
  const std::vector<double>& nodes() const { return nodes_; }

  void eval(double s, double* values) const;
  Eigen::MatrixXd tabulate(const std::vector<double>& pts) const;

 private:
  int degree_;
  std::vector<double> nodes_;
  Eigen::MatrixXd coeff_;
};

struct TriangleQuadrature {
  std::vector<Vec2> points;
  std::vector<double> weights;  // sum to 1/2
};

struct SegmentQuadrature {
  std::vector<double> points;   // in [0,1]
  std::vector<double> weights;  // sum to 1
};

/// Gauss-Legendre rule on [0,1] exact for the given polynomial degree.
SegmentQuadrature segment_quadrature(int exactness_degree);  // 0..12

/// Collapsed-square (Duffy) tensor rule on the reference triangle, exact for
/// the given total polynomial degree.
TriangleQuadrature triangle_quadrature(int exactness_degree);  // 0..12

/// Affine map between the reference triangle and a physical cell.
struct CellMap {
  Vec2 v0;
  double j00, j01, j10, j11;  // Jacobian columns v1-v0, v2-v0
  double det;
  double i00, i01, i10, i11;  // inverse Jacobian

  static CellMap from(const Triangulation& tri, int cell);
  Vec2 to_physical(const Vec2& ref) const {
    return {v0.x + j00 * ref.x + j01 * ref.y, v0.y + j10 * ref.x + j11 * ref.y};
  }
  Vec2 to_reference(const Vec2& x) const {
    const double dx = x.x - v0.x, dy = x.y - v0.y;
    return {i00 * dx + i01 * dy, i10 * dx + i11 * dy};
  }
  /// Physical gradient from a reference gradient: J^{-T} g.
  Vec2 grad_to_physical(const Vec2& g) const {
    return {i00 * g.x + i10 * g.y, i01 * g.x + i11 * g.y};
  }
};

/// Trace of one cell on one of its facets: quadrature points of the facet's
/// canonical [0,1] parameterization mapped into the cell's reference frame
/// (periodic shift applied), plus outward normal and length. Both sides of a
/// facet use the same canonical parameter, so facet functions evaluated at s
/// are single-valued.
struct FacetTrace {
  int facet = -1;
  int side = -1;
  Vec2 normal{};
  double length = 0.0;
  std::vector<Vec2> cell_ref;   // reference coordinates in the cell
  std::vector<Vec2> physical;   // physical points, in the cell's frame
};

FacetTrace facet_trace(const Triangulation& tri, int cell, int local_facet,
                       const std::vector<double>& s_points);

enum class LayoutKind { CellDiscontinuous, Facet };

/// Degree-of-freedom numbering. Cell layouts give every cell its own block;
/// facet layouts give every active facet (merged periodic images included via
/// their representative) one shared block. Vector components interleave per
/// node: global = offset + node*components + component.
struct DofLayout {
  LayoutKind kind = LayoutKind::CellDiscontinuous;
  int degree = 0;
  int components = 1;
  int dofs_per_entity = 0;
  int num_dofs = 0;
  std::vector<int> entity_offset;      // per cell, or per facet (-1 impossible)
  std::vector<char> facet_constrained; // Facet kind: 1 on Dirichlet facets
  std::vector<int> constrained_dofs;   // sorted global indices

  int offset(int entity) const { return entity_offset[entity]; }
  int dof(int entity, int node, int comp = 0) const {
    return entity_offset[entity] + node * components + comp;
  }
};

DofLayout build_layout(const Triangulation& tri, LayoutKind kind, int degree,
                       int components,
                       const std::vector<BoundaryMarker>& dirichlet_markers = {});

struct DiscreteField {
  DofLayout layout;
  Eigen::VectorXd coeffs;

  static DiscreteField zero(const DofLayout& layout);
};

/// Point evaluation of a CellDiscontinuous field. Throws for Facet layouts.
/// The overloads taking a ReferenceBasis avoid rebuilding it in hot loops;
/// the basis degree must match the field's layout.
double evaluate_scalar(const Triangulation& tri, const DiscreteField& f,
                       const CellLocation& loc);
double evaluate_scalar(const DiscreteField& f, const CellLocation& loc,
                       const ReferenceBasis& basis);
Vec2 evaluate_vector(const Triangulation& tri, const DiscreteField& f,
                     const CellLocation& loc);
Vec2 evaluate_vector(const DiscreteField& f, const CellLocation& loc,
                     const ReferenceBasis& basis);
Vec2 evaluate_scalar_gradient(const Triangulation& tri, const DiscreteField& f,
                              const CellLocation& loc);

/// Cellwise L2 projection of a function onto a CellDiscontinuous layout
/// (exact mass matrix, quadrature 2*degree+2).
DiscreteField project_function(const Triangulation& tri, const DofLayout& layout,
                               const std::function<double(Vec2)>& fn);
DiscreteField project_function(const Triangulation& tri, const DofLayout& layout,
                               const std::function<Vec2(Vec2)>& fn);

double l2_error(const Triangulation& tri, const DiscreteField& f,
                const std::function<double(Vec2)>& exact, int quad_exactness);
double l2_error(const Triangulation& tri, const DiscreteField& f,
                const std::function<Vec2(Vec2)>& exact, int quad_exactness);
double l2_norm(const Triangulation& tri, const DiscreteField& f);

}  // namespace pmhdg
