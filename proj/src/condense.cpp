#include "pmhdg/condense.hpp"

#include <cstdio>
#include <stdexcept>
#include <string>

#include "pmhdg/parallel.hpp"

namespace pmhdg {

CondensedSystem condense(const std::vector<LocalSystem>& locals, int num_facet_dofs,
                         const DirichletConstraints& constraints) {
  CondensedSystem sys;
  sys.num_facet_dofs = num_facet_dofs;
  sys.facet_values = Eigen::VectorXd::Zero(num_facet_dofs);
  std::vector<char> constrained(num_facet_dofs, 0);
  for (std::size_t i = 0; i < constraints.dofs.size(); ++i) {
    constrained[constraints.dofs[i]] = 1;
    sys.facet_values[constraints.dofs[i]] = constraints.values[i];
  }
  sys.reduced_index.assign(num_facet_dofs, -1);
  int n_free = 0;
  for (int d = 0; d < num_facet_dofs; ++d) {
    if (!constrained[d]) sys.reduced_index[d] = n_free++;
  }

  sys.cells.resize(locals.size());
  std::vector<Eigen::MatrixXd> schur(locals.size());
  std::vector<Eigen::VectorXd> schur_rhs(locals.size());
  std::vector<int> bad(locals.size(), 0);
  parallel_for(locals.size(), [&](std::size_t i) {
    const LocalSystem& ls = locals[i];
    CondensedSystem::CellData& cd = sys.cells[i];
    cd.cell = ls.cell;
    cd.A_lg = ls.A_lg;
    cd.b_l = ls.b_l;
    cd.local_dofs = ls.local_dofs;
    cd.facet_dofs = ls.facet_dofs;
    cd.lu.compute(ls.A_ll);
    if (!cd.lu.isInvertible()) {
      bad[i] = 1;
      return;
    }
    schur[i] = ls.A_gg - ls.A_gl * cd.lu.solve(ls.A_lg);
    schur_rhs[i] = ls.b_g - ls.A_gl * cd.lu.solve(ls.b_l);
  });
  for (std::size_t i = 0; i < locals.size(); ++i) {
    if (bad[i]) {
      throw std::runtime_error("condense: singular local block in cell " +
                               std::to_string(locals[i].cell));
    }
  }

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_free);
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t i = 0; i < locals.size(); ++i) {
    const auto& fd = locals[i].facet_dofs;
    for (std::size_t r = 0; r < fd.size(); ++r) {
      const int gr = sys.reduced_index[fd[r]];
      if (gr < 0) continue;
      rhs[gr] += schur_rhs[i][r];
      for (std::size_t c = 0; c < fd.size(); ++c) {
        const int gc = sys.reduced_index[fd[c]];
        if (gc >= 0) {
          triplets.emplace_back(gr, gc, schur[i](r, c));
        } else {
          rhs[gr] -= schur[i](r, c) * sys.facet_values[fd[c]];
        }
      }
    }
  }
  sys.matrix.resize(n_free, n_free);
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  sys.rhs = std::move(rhs);
  return sys;
}

Eigen::VectorXd solve_global(const CondensedSystem& sys) {
  Eigen::VectorXd full = sys.facet_values;
  if (sys.matrix.rows() > 0) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(sys.matrix);
    if (lu.info() != Eigen::Success) {
      throw std::runtime_error("solve_global: singular condensed matrix (" +
                               lu.lastErrorMessage() + ")");
    }
    Eigen::VectorXd x = lu.solve(sys.rhs);
    const double bnorm = sys.rhs.lpNorm<Eigen::Infinity>();
    if (bnorm > 0.0) {
      // backward error with the standard normalization; a plain ||b|| scaling
      // is meaningless for the projection systems, whose right-hand side is
      // beta-scaled while matrix and solution are O(1)
      double anorm = 0.0;
      for (int r = 0; r < sys.matrix.outerSize(); ++r) {
        double s = 0.0;
        for (Eigen::SparseMatrix<double>::InnerIterator it(sys.matrix, r); it; ++it) {
          s += std::abs(it.value());
        }
        anorm = std::max(anorm, s);
      }
      auto backward_error = [&](const Eigen::VectorXd& y) {
        return (sys.matrix * y - sys.rhs).lpNorm<Eigen::Infinity>() /
               (anorm * y.lpNorm<Eigen::Infinity>() + bnorm);
      };
      double res = backward_error(x);
      for (int it = 0; it < 3 && res > 1e-14; ++it) {
        x += lu.solve(sys.rhs - sys.matrix * x);
        res = backward_error(x);
      }
      if (!(res <= 1e-10)) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.3e", res);
        throw std::runtime_error("solve_global: residual " + std::string(buf) +
                                 " exceeds 1e-10");
      }
    }
    for (int d = 0; d < sys.num_facet_dofs; ++d) {
      if (sys.reduced_index[d] >= 0) full[d] = x[sys.reduced_index[d]];
    }
  }
  return full;
}

Eigen::VectorXd back_substitute(const CondensedSystem& sys,
                                const Eigen::VectorXd& facet_solution,
                                int num_local_dofs) {
  Eigen::VectorXd local = Eigen::VectorXd::Zero(num_local_dofs);
  parallel_for(sys.cells.size(), [&](std::size_t i) {
    const auto& cd = sys.cells[i];
    Eigen::VectorXd xg(cd.facet_dofs.size());
    for (std::size_t r = 0; r < cd.facet_dofs.size(); ++r) {
      xg[r] = facet_solution[cd.facet_dofs[r]];
    }
    const Eigen::VectorXd xl = cd.lu.solve(cd.b_l - cd.A_lg * xg);
    for (std::size_t r = 0; r < cd.local_dofs.size(); ++r) {
      local[cd.local_dofs[r]] = xl[r];
    }
  });
  return local;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> monolithic_oracle_solve(
    const std::vector<LocalSystem>& locals, int num_local_dofs, int num_facet_dofs,
    const DirichletConstraints& constraints) {
  const int n = num_local_dofs + num_facet_dofs;
  if (n > 5000) {
    throw std::invalid_argument("monolithic_oracle_solve: dof cap (5000) exceeded");
  }
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  auto gdof = [&](int facet_dof) { return num_local_dofs + facet_dof; };
  for (const LocalSystem& ls : locals) {
    const auto& ld = ls.local_dofs;
    const auto& fd = ls.facet_dofs;
    for (std::size_t r = 0; r < ld.size(); ++r) {
      b[ld[r]] += ls.b_l[r];
      for (std::size_t c = 0; c < ld.size(); ++c) A(ld[r], ld[c]) += ls.A_ll(r, c);
      for (std::size_t c = 0; c < fd.size(); ++c) A(ld[r], gdof(fd[c])) += ls.A_lg(r, c);
    }
    for (std::size_t r = 0; r < fd.size(); ++r) {
      b[gdof(fd[r])] += ls.b_g[r];
      for (std::size_t c = 0; c < ld.size(); ++c) A(gdof(fd[r]), ld[c]) += ls.A_gl(r, c);
      for (std::size_t c = 0; c < fd.size(); ++c) {
        A(gdof(fd[r]), gdof(fd[c])) += ls.A_gg(r, c);
      }
    }
  }
  for (std::size_t i = 0; i < constraints.dofs.size(); ++i) {
    const int d = gdof(constraints.dofs[i]);
    A.row(d).setZero();
    A(d, d) = 1.0;
    b[d] = constraints.values[i];
  }
  const Eigen::VectorXd x = A.fullPivLu().solve(b);
  return {x.head(num_local_dofs), x.tail(num_facet_dofs)};
}

}  // namespace pmhdg
