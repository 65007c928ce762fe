#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <utility>
#include <vector>

namespace pmhdg {

/// Per-cell block system coupling cell-local dofs to facet dofs:
///   [A_ll A_lg] [x_l]   [b_l]
///   [A_gl A_gg] [x_g] = [b_g]
/// local_dofs and facet_dofs carry the global numbering of the rows.
struct LocalSystem {
  int cell = -1;
  Eigen::MatrixXd A_ll, A_lg, A_gl, A_gg;
  Eigen::VectorXd b_l, b_g;
  std::vector<int> local_dofs;
  std::vector<int> facet_dofs;
};

/// Dirichlet data on facet dofs, imposed by elimination.
struct DirichletConstraints {
  std::vector<int> dofs;
  std::vector<double> values;
};

struct CondensedSystem {
  int num_facet_dofs = 0;
  Eigen::SparseMatrix<double> matrix;  // unconstrained facet dofs only
  Eigen::VectorXd rhs;
  std::vector<int> reduced_index;      // facet dof -> row in matrix, -1 if constrained
  Eigen::VectorXd facet_values;        // Dirichlet values (0 on free dofs)

  struct CellData {
    int cell = -1;
    Eigen::FullPivLU<Eigen::MatrixXd> lu;  // of A_ll
    Eigen::MatrixXd A_lg;
    Eigen::VectorXd b_l;
    std::vector<int> local_dofs;
    std::vector<int> facet_dofs;
  };
  std::vector<CellData> cells;
};

/// Schur-complement elimination of the cell-local dofs. Throws naming the
/// cell if some A_ll is singular (particle starvation or a degenerate cell).
CondensedSystem condense(const std::vector<LocalSystem>& locals, int num_facet_dofs,
                         const DirichletConstraints& constraints);

/// Direct sparse solve of the condensed system. Returns the full facet dof
/// vector with Dirichlet values filled in; enforces a relative infinity-norm
/// residual of 1e-10.
Eigen::VectorXd solve_global(const CondensedSystem& sys);

/// Recover the cell-local dofs from a facet solution.
Eigen::VectorXd back_substitute(const CondensedSystem& sys,
                                const Eigen::VectorXd& facet_solution,
                                int num_local_dofs);

/// Dense uncondensed solve of the same block systems; test oracle only.
/// Returns (local dof vector, facet dof vector). Capped at 5000 total dofs.
std::pair<Eigen::VectorXd, Eigen::VectorXd> monolithic_oracle_solve(
    const std::vector<LocalSystem>& locals, int num_local_dofs, int num_facet_dofs,
    const DirichletConstraints& constraints);

}  // namespace pmhdg
