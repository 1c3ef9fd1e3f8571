#include "wgqst/arrowhead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "wgqst/errors.hpp"
#include "reciprocal.hpp"

namespace wgqst {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Root of a t^2 + b t + c = 0 inside (lo, hi), or NaN.
double quadratic_root_in(double a, double b, double c, double lo, double hi) {
  double r1, r2;
  if (a == 0.0) {
    if (b == 0.0) return std::nan("");
    r1 = r2 = -c / b;
  } else {
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return std::nan("");
    const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
    r1 = q / a;
    r2 = q != 0.0 ? c / q : r1;
  }
  if (r1 > lo && r1 < hi) return r1;
  if (r2 > lo && r2 < hi) return r2;
  return std::nan("");
}

struct SecularSums {
  double psiL = 0.0, dpsiL = 0.0, psiR = 0.0, dpsiR = 0.0;
};

// Accumulates sum w_i r_i and sum w_i r_i^2 with r_i = 1 / ((p_i - po) - t) over [b, e).
void weighted_sums(const double* p, const double* w, int b, int e, double po, double t, double& s1, double& s2) {
  alignas(64) double r[detail::kChunk];
  double a1 = 0.0, a2 = 0.0;
  for (int c = b; c < e; c += detail::kChunk) {
    const int n = std::min(detail::kChunk, e - c);
    detail::shifted_reciprocal(p + c, nullptr, po, -t, n, r);
    const double* wc = w + c;
#pragma omp simd reduction(+ : a1, a2)
    for (int i = 0; i < n; ++i) {
      const double a = wc[i] * r[i];
      a1 += a;
      a2 += a * r[i];
    }
  }
  s1 = a1;
  s2 = a2;
}

// Sums of w_i / (p_i - p_o - t) and their derivatives, split at pole nl.
SecularSums secular_sums(const double* p, const double* w, int m, int nl, double po, double t) {
  SecularSums s;
  weighted_sums(p, w, 0, nl, po, t, s.psiL, s.dpsiL);
  weighted_sums(p, w, nl, m, po, t, s.psiR, s.dpsiR);
  return s;
}

// Product over l in [b, e) of num_l / (p_l - pi), num_l = (lb[l+o] - pi) + tau[l+o].
double ratio_product(const double* p, const double* lb, const double* tau, int b, int e, int o, double pi) {
  alignas(64) double r[detail::kChunk];
  double prod = 1.0;
  for (int c = b; c < e; c += detail::kChunk) {
    const int n = std::min(detail::kChunk, e - c);
    detail::shifted_reciprocal(p + c, nullptr, pi, 0.0, n, r);
    const double *lc = lb + c + o, *tc = tau + c + o;
#pragma omp simd reduction(* : prod)
    for (int i = 0; i < n; ++i) prod *= ((lc[i] - pi) + tc[i]) * r[i];
  }
  return prod;
}

}  // namespace

ArrowheadEigen::ArrowheadEigen(double alpha, const Eigen::VectorXcd& z, const Eigen::VectorXd& d) {
  n_ = static_cast<int>(d.size());
  if (z.size() != d.size()) throw StructuralError("arrowhead coupling and diagonal sizes differ");
  if (!std::isfinite(alpha) || !d.allFinite() || !z.allFinite())
    throw NumericalError("arrowhead input is not finite");

  perm_.resize(n_);
  std::iota(perm_.begin(), perm_.end(), 0);
  std::stable_sort(perm_.begin(), perm_.end(), [&](int a, int b) { return d[a] < d[b]; });

  Eigen::VectorXd dw(n_);
  Eigen::VectorXcd zw(n_);
  for (int p = 0; p < n_; ++p) {
    dw[p] = d[perm_[p]];
    zw[p] = z[perm_[p]];
  }

  const double scale = std::max(std::abs(alpha), n_ > 0 ? dw.cwiseAbs().maxCoeff() : 0.0) + z.norm();
  const double tol = 8.0 * kEps * scale;

  std::vector<int> sec;
  std::vector<int> defl;
  int cur = -1;
  for (int p = 0; p < n_; ++p) {
    if (std::abs(zw[p]) <= tol) {
      defl.push_back(p);
      continue;
    }
    if (cur >= 0) {
      const double r = std::hypot(std::abs(zw[cur]), std::abs(zw[p]));
      const double c = std::abs(zw[p]) / r, s = std::abs(zw[cur]) / r;
      if (std::abs((dw[p] - dw[cur]) * c * s) <= tol) {
        // Rotate the pair so that only p couples; cur becomes an eigenvector.
        const std::complex<double> a = zw[p] / r, b = zw[cur] / r;
        rot_.push_back({p, cur, a, b});
        const double dp = std::norm(a) * dw[p] + std::norm(b) * dw[cur];
        const double dc = std::norm(b) * dw[p] + std::norm(a) * dw[cur];
        dw[p] = dp;
        dw[cur] = dc;
        zw[p] = r;
        zw[cur] = 0.0;
        defl.push_back(cur);
        cur = p;
        continue;
      }
      sec.push_back(cur);
    }
    cur = p;
  }
  if (cur >= 0) sec.push_back(cur);

  sec_ = sec;
  defl_ = defl;
  const int m = static_cast<int>(sec_.size());
  pole_.resize(m);
  w_.resize(m);
  Eigen::VectorXcd zs(m);
  for (int i = 0; i < m; ++i) {
    pole_[i] = dw[sec_[i]];
    zs[i] = zw[sec_[i]];
    w_[i] = std::norm(zs[i]);
  }
  for (int i = 1; i < m; ++i)
    if (!(pole_[i] > pole_[i - 1])) throw NumericalError("arrowhead deflation left unsorted poles");
  defl_val_.resize(static_cast<Eigen::Index>(defl_.size()));
  for (std::size_t q = 0; q < defl_.size(); ++q) defl_val_[q] = dw[defl_[q]];

  solve_roots(alpha);
  recompute_couplings(zs);

  // Output columns in ascending energy.
  const int total = n_ + 1;
  std::vector<double> e(total);
  for (int j = 0; j <= m; ++j) e[j] = lam_base_[j] + tau_[j];
  for (std::size_t q = 0; q < defl_.size(); ++q) e[m + 1 + q] = defl_val_[q];
  col_.resize(total);
  std::iota(col_.begin(), col_.end(), 0);
  std::stable_sort(col_.begin(), col_.end(), [&](int a, int b) { return e[a] < e[b]; });
  energies_.resize(total);
  for (int c = 0; c < total; ++c) energies_[c] = e[col_[c]];
}

void ArrowheadEigen::solve_roots(double alpha) {
  const int m = static_cast<int>(pole_.size());
  origin_.assign(m + 1, 0);
  tau_.setZero(m + 1);
  lam_base_.setZero(m + 1);
  if (m == 0) {
    lam_base_[0] = alpha;
    return;
  }
  const double znorm = std::sqrt(w_.sum());
  const double* p = pole_.data();
  const double* w = w_.data();

  for (int j = 0; j <= m; ++j) {
    // Root j lies between pole j-1 and pole j.
    int o;
    double lo, hi;
    if (j == 0) {
      o = 0;
      lo = std::min(alpha - p[0], 0.0) - znorm * (1.0 + 4.0 * kEps) - 4.0 * kEps * std::abs(p[0]);
      hi = 0.0;
    } else if (j == m) {
      o = m - 1;
      lo = 0.0;
      hi = std::max(alpha - p[m - 1], 0.0) + znorm * (1.0 + 4.0 * kEps) + 4.0 * kEps * std::abs(p[m - 1]);
    } else {
      const double gap = p[j] - p[j - 1];
      const SecularSums s = secular_sums(p, w, m, j, p[j - 1], 0.5 * gap);
      const double fmid = (p[j - 1] - alpha) + 0.5 * gap + s.psiL + s.psiR;
      if (fmid >= 0.0) {
        o = j - 1;
        lo = 0.0;
        hi = 0.5 * gap;
      } else {
        o = j;
        lo = -0.5 * gap;
        hi = 0.0;
      }
    }
    const double po = p[o];
    const double eL = (j > 0) ? p[j - 1] - po : 0.0;
    const double eR = (j < m) ? p[j] - po : 0.0;
    const double shift = po - alpha;

    double t = 0.5 * (lo + hi);
    bool done = false;
    for (int it = 0; it < 100 && !done; ++it) {
      const SecularSums s = secular_sums(p, w, m, j, po, t);
      const double f = shift + t + s.psiL + s.psiR;
      const double err = 8.0 * kEps * (std::abs(shift) + std::abs(t) + s.psiR - s.psiL) + 1e-300;
      if (std::abs(f) <= err) break;
      if (f > 0.0)
        hi = t;
      else
        lo = t;

      double next;
      if (j == 0) {
        // g(u) = c + u - B/u with all poles on the right (origin pole at 0).
        const double B = s.dpsiR * t * t;
        const double c = f - t + B / t;
        next = quadratic_root_in(1.0, c, -B, -std::numeric_limits<double>::infinity(), 0.0);
      } else if (j == m) {
        const double B = s.dpsiL * t * t;
        const double c = f - t + B / t;
        next = quadratic_root_in(1.0, c, -B, 0.0, std::numeric_limits<double>::infinity());
      } else {
        const double BL = s.dpsiL * (eL - t) * (eL - t);
        const double BR = (s.dpsiR + 1.0) * (eR - t) * (eR - t);
        const double c = f - BL / (eL - t) - BR / (eR - t);
        next = quadratic_root_in(c, -(c * (eL + eR) + BL + BR), c * eL * eR + BL * eR + BR * eL, eL, eR);
      }
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - t) <= 2.0 * kEps * std::abs(t) || hi - lo <= 2.0 * kEps * std::max(std::abs(lo), std::abs(hi)))
        done = true;
      t = next;
    }
    if (!std::isfinite(t)) throw NumericalError("secular equation root is not finite");
    origin_[j] = o;
    tau_[j] = t;
    lam_base_[j] = po;
  }
}

void ArrowheadEigen::recompute_couplings(const Eigen::VectorXcd& zs) {
  const int m = static_cast<int>(pole_.size());
  zhat_.resize(m);
  inv_norm_.setOnes(m + 1);
  if (m == 0) return;
  const double* p = pole_.data();
  const double* lb = lam_base_.data();
  const double* tau = tau_.data();
  Eigen::VectorXd zh2(m);
  for (int i = 0; i < m; ++i) {
    const double pi = p[i];
    // Pair eigenvalue j=l+1 with pole l below i, and j=l with pole l above i.
    const double prod_lo = ratio_product(p, lb, tau, 0, i, 1, pi);
    const double prod_hi = ratio_product(p, lb, tau, i + 1, m, 0, pi);
    double prod = -((lb[0] - pi) + tau[0]) * ((lb[m] - pi) + tau[m]) * prod_lo * prod_hi;
    if (!(prod > 0.0)) prod = w_[i];  // interlacing lost to rounding; keep the input weight
    zh2[i] = prod;
    zhat_[i] = std::sqrt(prod) * (zs[i] / std::abs(zs[i]));
  }
  const double* z2 = zh2.data();
  for (int j = 0; j <= m; ++j) {
    const double lj = lb[j], tj = tau[j];
    // (lj - p_i) + tj = -((p_i - lj) - tj); the sign drops out of the square.
    double acc, unused;
    weighted_sums(p, z2, 0, m, lj, tj, unused, acc);
    inv_norm_[j] = 1.0 / std::sqrt(1.0 + acc);
  }
}

void ArrowheadEigen::to_original(Eigen::VectorXcd& v) const {
  for (auto it = rot_.rbegin(); it != rot_.rend(); ++it) {
    const std::complex<double> xi = v[it->i], xj = v[it->j];
    v[it->i] = it->a * xi - std::conj(it->b) * xj;
    v[it->j] = it->b * xi + std::conj(it->a) * xj;
  }
}

void ArrowheadEigen::to_working(Eigen::VectorXcd& v) const {
  for (const auto& r : rot_) {
    const std::complex<double> yi = v[r.i], yj = v[r.j];
    v[r.i] = std::conj(r.a) * yi + std::conj(r.b) * yj;
    v[r.j] = -r.b * yi + r.a * yj;
  }
}

Eigen::VectorXcd ArrowheadEigen::apply(const Eigen::VectorXcd& x) const {
  if (x.size() != size()) throw StructuralError("arrowhead apply: size mismatch");
  const int m = static_cast<int>(pole_.size());
  Eigen::VectorXcd xs = Eigen::VectorXcd::Zero(m + 1);
  Eigen::VectorXcd work = Eigen::VectorXcd::Zero(n_);
  for (int c = 0; c <= n_; ++c) {
    const int k = col_[c];
    if (k <= m)
      xs[k] = x[c] * inv_norm_[k];
    else
      work[defl_[k - m - 1]] += x[c];
  }
  Eigen::VectorXcd out(n_ + 1);
  out[0] = xs.sum();
  const Eigen::VectorXd yr = xs.real(), yi = xs.imag();
  const double *lb = lam_base_.data(), *tau = tau_.data(), *ar = yr.data(), *ai = yi.data();
  alignas(64) double r[detail::kChunk];
  for (int i = 0; i < m; ++i) {
    const double pi = pole_[i];
    double sr = 0.0, si = 0.0;
    for (int c = 0; c <= m; c += detail::kChunk) {
      const int n = std::min(detail::kChunk, m + 1 - c);
      detail::shifted_reciprocal(lb + c, tau + c, pi, 0.0, n, r);
      const double *xr = ar + c, *xi = ai + c;
#pragma omp simd reduction(+ : sr, si)
      for (int j = 0; j < n; ++j) {
        sr += xr[j] * r[j];
        si += xi[j] * r[j];
      }
    }
    work[sec_[i]] += zhat_[i] * std::complex<double>(sr, si);
  }
  to_original(work);
  for (int p = 0; p < n_; ++p) out[1 + perm_[p]] = work[p];
  return out;
}

Eigen::VectorXcd ArrowheadEigen::apply_adjoint(const Eigen::VectorXcd& y) const {
  if (y.size() != size()) throw StructuralError("arrowhead apply_adjoint: size mismatch");
  const int m = static_cast<int>(pole_.size());
  Eigen::VectorXcd work(n_);
  for (int p = 0; p < n_; ++p) work[p] = y[1 + perm_[p]];
  to_working(work);
  Eigen::VectorXcd g(m);
  for (int i = 0; i < m; ++i) g[i] = std::conj(zhat_[i]) * work[sec_[i]];
  Eigen::VectorXcd xs(m + 1);
  if (g.isZero(0.0)) {
    for (int j = 0; j <= m; ++j) xs[j] = inv_norm_[j] * y[0];
  } else {
    const Eigen::VectorXd gr = g.real(), gi = g.imag();
    const double *p = pole_.data(), *br = gr.data(), *bi = gi.data();
    alignas(64) double r[detail::kChunk];
    for (int j = 0; j <= m; ++j) {
      const double lj = lam_base_[j], tj = tau_[j];
      double sr = 0.0, si = 0.0;
      for (int c = 0; c < m; c += detail::kChunk) {
        const int n = std::min(detail::kChunk, m - c);
        detail::shifted_reciprocal(p + c, nullptr, lj, -tj, n, r);
        const double *xr = br + c, *xi = bi + c;
#pragma omp simd reduction(+ : sr, si)
        for (int i = 0; i < n; ++i) {
          sr += xr[i] * r[i];
          si += xi[i] * r[i];
        }
      }
      // r holds -1 / ((lj - p_i) + tj).
      xs[j] = inv_norm_[j] * (y[0] - std::complex<double>(sr, si));
    }
  }
  Eigen::VectorXcd out(n_ + 1);
  for (int c = 0; c <= n_; ++c) {
    const int k = col_[c];
    out[c] = k <= m ? xs[k] : work[defl_[k - m - 1]];
  }
  return out;
}

Eigen::VectorXcd ArrowheadEigen::corner_row() const {
  const int m = static_cast<int>(pole_.size());
  Eigen::VectorXcd r(n_ + 1);
  for (int c = 0; c <= n_; ++c) r[c] = col_[c] <= m ? inv_norm_[col_[c]] : 0.0;
  return r;
}

Eigen::MatrixXcd ArrowheadEigen::dense() const {
  const int m = static_cast<int>(pole_.size());
  Eigen::MatrixXcd V = Eigen::MatrixXcd::Zero(n_ + 1, n_ + 1);
  Eigen::MatrixXcd W = Eigen::MatrixXcd::Zero(n_, n_ + 1);
  for (int c = 0; c <= n_; ++c) {
    const int k = col_[c];
    if (k <= m) {
      V(0, c) = inv_norm_[k];
      for (int i = 0; i < m; ++i)
        W(sec_[i], c) = zhat_[i] * inv_norm_[k] / ((lam_base_[k] - pole_[i]) + tau_[k]);
    } else {
      W(defl_[k - m - 1], c) = 1.0;
    }
  }
  for (auto it = rot_.rbegin(); it != rot_.rend(); ++it) {
    const Eigen::RowVectorXcd ri = W.row(it->i), rj = W.row(it->j);
    W.row(it->i) = it->a * ri - std::conj(it->b) * rj;
    W.row(it->j) = it->b * ri + std::conj(it->a) * rj;
  }
  for (int p = 0; p < n_; ++p) V.row(1 + perm_[p]) = W.row(p);
  return V;
}

}  // namespace wgqst
