#include "homog/krylov.hpp"

#include <cmath>
#include <cstddef>

namespace homog {

namespace {

double dotv(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const std::vector<double>& a) { return std::sqrt(dotv(a, a)); }

void apply_prec(const std::vector<double>& inv_diag, const std::vector<double>& r,
                std::vector<double>& z) {
  if (inv_diag.empty()) {
    z = r;
    return;
  }
  z.resize(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) z[i] = inv_diag[i] * r[i];
}

} // namespace

KrylovResult cg(const LinOp& A, const std::vector<double>& b, std::vector<double>& x,
                const std::vector<double>& inv_diag, double tol, int max_iter) {
  const std::size_t n = b.size();
  x.assign(n, 0.0);
  std::vector<double> r = b, z, p, Ap(n);
  KrylovResult res;
  double bnorm = norm(b);
  if (bnorm == 0) {
    res.converged = true;
    return res;
  }
  apply_prec(inv_diag, r, z);
  p = z;
  double rz = dotv(r, z);
  for (int it = 0; it < max_iter; ++it) {
    A(p, Ap);
    double pAp = dotv(p, Ap);
    if (pAp <= 0) break; // loss of positive definiteness
    double alpha = rz / pAp;
    for (std::size_t i = 0; i < n; ++i) x[i] += alpha * p[i];
    for (std::size_t i = 0; i < n; ++i) r[i] -= alpha * Ap[i];
    res.iters = it + 1;
    double rnorm = norm(r);
    res.rel_residual = rnorm / bnorm;
    if (res.rel_residual <= tol) {
      res.converged = true;
      return res;
    }
    apply_prec(inv_diag, r, z);
    double rz_new = dotv(r, z);
    double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  return res;
}

KrylovResult bicgstab(const LinOp& A, const std::vector<double>& b, std::vector<double>& x,
                      const std::vector<double>& inv_diag, double tol, int max_iter) {
  const std::size_t n = b.size();
  x.assign(n, 0.0);
  std::vector<double> r = b;
  KrylovResult res;
  double bnorm = norm(b);
  if (bnorm == 0) {
    res.converged = true;
    return res;
  }
  std::vector<double> r0 = r, p(n, 0.0), v(n, 0.0), s(n), t(n), phat(n), shat(n);
  double rho = 1, alpha = 1, omega = 1;
  double best = 1e300;
  int since_best = 0;
  for (int it = 0; it < max_iter; ++it) {
    double rho_new = dotv(r0, r);
    if (std::abs(rho_new) < 1e-300) break;
    double beta = (rho_new / rho) * (alpha / omega);
    rho = rho_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    apply_prec(inv_diag, p, phat);
    A(phat, v);
    double r0v = dotv(r0, v);
    if (std::abs(r0v) < 1e-300) break;
    alpha = rho / r0v;
    for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    double snorm = norm(s);
    if (snorm / bnorm <= tol) {
      for (std::size_t i = 0; i < n; ++i) x[i] += alpha * phat[i];
      res.iters = it + 1;
      res.rel_residual = snorm / bnorm;
      res.converged = true;
      return res;
    }
    apply_prec(inv_diag, s, shat);
    A(shat, t);
    double tt = dotv(t, t);
    if (tt < 1e-300) break;
    omega = dotv(t, s) / tt;
    for (std::size_t i = 0; i < n; ++i) x[i] += alpha * phat[i] + omega * shat[i];
    for (std::size_t i = 0; i < n; ++i) r[i] = s[i] - omega * t[i];
    res.iters = it + 1;
    double rnorm = norm(r);
    res.rel_residual = rnorm / bnorm;
    if (res.rel_residual <= tol) {
      res.converged = true;
      return res;
    }
    if (rnorm < best * 0.5) {
      best = rnorm;
      since_best = 0;
    } else if (++since_best > 400) {
      res.stagnated = true; // no factor-2 progress over 400 iterations
      return res;
    }
    if (std::abs(omega) < 1e-300) break;
  }
  return res;
}

KrylovResult gmres(const LinOp& A, const std::vector<double>& b, std::vector<double>& x,
                   const std::vector<double>& inv_diag, double tol, int max_iter) {
  const std::size_t n = b.size();
  x.assign(n, 0.0);
  KrylovResult res;
  std::vector<double> w(n), t(n);
  apply_prec(inv_diag, b, w);
  const double bnorm = norm(w);
  if (bnorm == 0) {
    res.converged = true;
    return res;
  }
  const int m = static_cast<int>(std::min<std::size_t>(
      {300, n, static_cast<std::size_t>(std::max(1, max_iter))}));
  const int ld = m + 1;
  std::vector<std::vector<double>> V(static_cast<std::size_t>(m) + 1,
                                     std::vector<double>(n));
  std::vector<double> H(static_cast<std::size_t>(ld) * m, 0.0); // column-major
  std::vector<double> cs(m), sn(m), g(ld), y(m);
  int total = 0;

  while (total < max_iter) {
    A(x, t);
    for (std::size_t i = 0; i < n; ++i) t[i] = b[i] - t[i];
    apply_prec(inv_diag, t, w);
    const double beta = norm(w);
    res.rel_residual = beta / bnorm;
    if (res.rel_residual <= tol) {
      res.converged = true;
      return res;
    }
    for (std::size_t i = 0; i < n; ++i) V[0][i] = w[i] / beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;

    int j = 0;
    bool breakdown = false;
    for (; j < m && total < max_iter; ++total) {
      A(V[j], t);
      apply_prec(inv_diag, t, w);
      for (int i = 0; i <= j; ++i) {
        const double hij = dotv(w, V[i]);
        H[static_cast<std::size_t>(i) + static_cast<std::size_t>(j) * ld] = hij;
        for (std::size_t k = 0; k < n; ++k) w[k] -= hij * V[i][k];
      }
      const double hnext = norm(w);
      H[static_cast<std::size_t>(j) + 1 + static_cast<std::size_t>(j) * ld] = hnext;
      if (hnext > 0)
        for (std::size_t k = 0; k < n; ++k) V[j + 1][k] = w[k] / hnext;
      for (int i = 0; i < j; ++i) {
        double* col = &H[static_cast<std::size_t>(j) * ld];
        const double a0 = col[i], a1 = col[i + 1];
        col[i] = cs[i] * a0 + sn[i] * a1;
        col[i + 1] = -sn[i] * a0 + cs[i] * a1;
      }
      double* col = &H[static_cast<std::size_t>(j) * ld];
      const double denom = std::hypot(col[j], col[j + 1]);
      if (denom < 1e-300) {
        breakdown = true;
        ++total;
        break;
      }
      cs[j] = col[j] / denom;
      sn[j] = col[j + 1] / denom;
      col[j] = denom;
      col[j + 1] = 0;
      const double gj = g[j];
      g[j] = cs[j] * gj;
      g[j + 1] = -sn[j] * gj;
      ++j;
      res.iters = total + 1;
      if (std::abs(g[j]) / bnorm <= tol) {
        ++total;
        break;
      }
    }
    for (int i = j - 1; i >= 0; --i) {
      double s = g[i];
      for (int k = i + 1; k < j; ++k)
        s -= H[static_cast<std::size_t>(i) + static_cast<std::size_t>(k) * ld] * y[k];
      y[i] = s / H[static_cast<std::size_t>(i) + static_cast<std::size_t>(i) * ld];
    }
    for (int i = 0; i < j; ++i)
      for (std::size_t k = 0; k < n; ++k) x[k] += y[i] * V[i][k];
    if (j == 0 || breakdown) break;
  }

  A(x, t);
  for (std::size_t i = 0; i < n; ++i) t[i] = b[i] - t[i];
  apply_prec(inv_diag, t, w);
  res.rel_residual = norm(w) / bnorm;
  res.converged = res.rel_residual <= tol;
  return res;
}

} // namespace homog
