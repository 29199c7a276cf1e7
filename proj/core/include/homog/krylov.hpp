#pragma once

#include <functional>
#include <vector>

namespace homog {

using LinOp = std::function<void(const std::vector<double>&, std::vector<double>&)>;

struct KrylovResult {
  int iters = 0;
  double rel_residual = 0; // ||b - Ax|| / ||b||
  bool converged = false;
  bool stagnated = false;
};

/// Preconditioned conjugate gradients for symmetric positive definite A.
/// inv_diag holds the reciprocal diagonal (Jacobi); pass empty for identity.
KrylovResult cg(const LinOp& A, const std::vector<double>& b, std::vector<double>& x,
                const std::vector<double>& inv_diag, double tol, int max_iter);

/// BiCGStab with Jacobi preconditioning for general invertible A.
KrylovResult bicgstab(const LinOp& A, const std::vector<double>& b, std::vector<double>& x,
                      const std::vector<double>& inv_diag, double tol, int max_iter);

/// Restarted GMRES with Jacobi preconditioning. Residual never increases
/// within a cycle, so badly conditioned systems stall instead of diverging.
KrylovResult gmres(const LinOp& A, const std::vector<double>& b, std::vector<double>& x,
                   const std::vector<double>& inv_diag, double tol, int max_iter);

} // namespace homog
