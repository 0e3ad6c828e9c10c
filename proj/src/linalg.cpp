#include "trec/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "trec/flops.hpp"

namespace trec::linalg {

namespace {

constexpr double kJacobiTol = 1.0e-15;
constexpr int kMaxSweeps = 60;

// One-sided (Hestenes) Jacobi: rotates column pairs of w until all pairs are
// numerically orthogonal. After convergence column j equals u_j * sigma_j.
// The cyclic (p, q) order is fixed, so the result is deterministic.
void jacobi_orthogonalize(Matrix& w, Matrix* v) {
  const Index m = w.rows();
  const Index n = w.cols();
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (Index p = 0; p < n - 1; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        double* wp = w.col(p);
        double* wq = w.col(q);
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (Index i = 0; i < m; ++i) {
          app += wp[i] * wp[i];
          aqq += wq[i] * wq[i];
          apq += wp[i] * wq[i];
        }
        flops::add(static_cast<std::uint64_t>(3 * m));
        if (app == 0.0 || aqq == 0.0) continue;
        if (std::fabs(apq) <= kJacobiTol * std::sqrt(app) * std::sqrt(aqq)) continue;

        const double zeta = (aqq - app) / (2.0 * apq);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (Index i = 0; i < m; ++i) {
          const double xp = wp[i], xq = wq[i];
          wp[i] = c * xp - s * xq;
          wq[i] = s * xp + c * xq;
        }
        flops::add(static_cast<std::uint64_t>(4 * m));
        if (v) {
          double* vp = v->col(p);
          double* vq = v->col(q);
          const Index nv = v->rows();
          for (Index i = 0; i < nv; ++i) {
            const double xp = vp[i], xq = vq[i];
            vp[i] = c * xp - s * xq;
            vq[i] = s * xp + c * xq;
          }
          flops::add(static_cast<std::uint64_t>(4 * v->rows()));
        }
        rotated = true;
      }
    }
    if (!rotated) break;
  }
}

std::vector<Index> descending_order(const std::vector<double>& s) {
  std::vector<Index> idx(s.size());
  std::iota(idx.begin(), idx.end(), Index{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](Index a, Index b) { return s[a] > s[b]; });
  return idx;
}

// Replace column j of u by a deterministic unit vector orthogonal to
// columns 0..j-1: the first canonical basis vector whose twice-orthogonalized
// residual keeps more than half its length.
void complete_column(Matrix& u, Index j) {
  const Index m = u.rows();
  std::vector<double> cand(m);
  for (Index e = 0; e < m; ++e) {
    std::fill(cand.begin(), cand.end(), 0.0);
    cand[e] = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (Index c = 0; c < j; ++c) {
        const double* uc = u.col(c);
        double proj = 0.0;
        for (Index i = 0; i < m; ++i) proj += uc[i] * cand[i];
        for (Index i = 0; i < m; ++i) cand[i] -= proj * uc[i];
      }
    }
    double norm = 0.0;
    for (double x : cand) norm += x * x;
    norm = std::sqrt(norm);
    if (norm > 0.5) {
      for (Index i = 0; i < m; ++i) u(i, j) = cand[i] / norm;
      return;
    }
  }
  throw std::runtime_error("svd: failed to complete an orthonormal basis");
}

// Full SVD of a with rows >= cols; columns of u beyond the numerical rank are
// completed so u is always orthonormal.
void svd_tall(const Matrix& a, Matrix& u, std::vector<double>& s, Matrix& v) {
  const Index m = a.rows();
  const Index n = a.cols();
  Matrix w = a;
  v = Matrix::identity(n);
  jacobi_orthogonalize(w, &v);

  std::vector<double> norms(n);
  for (Index j = 0; j < n; ++j) {
    double acc = 0.0;
    const double* wj = w.col(j);
    for (Index i = 0; i < m; ++i) acc += wj[i] * wj[i];
    norms[j] = std::sqrt(acc);
  }
  const auto order = descending_order(norms);

  u = Matrix(m, n);
  s.resize(n);
  Matrix vs(n, n);
  const double smax = norms.empty() ? 0.0 : norms[order[0]];
  for (Index j = 0; j < n; ++j) {
    const Index src = order[j];
    s[j] = norms[src];
    for (Index i = 0; i < n; ++i) vs(i, j) = v(i, src);
    if (s[j] > kRankCutoff * smax && s[j] > 0.0) {
      const double inv = 1.0 / s[j];
      for (Index i = 0; i < m; ++i) u(i, j) = w(i, src) * inv;
    } else {
      complete_column(u, j);
    }
  }
  v = std::move(vs);
}

void apply_sign_convention(Matrix& u, Matrix& v) {
  for (Index j = 0; j < u.cols(); ++j) {
    Index imax = 0;
    double best = std::fabs(u(0, j));
    for (Index i = 1; i < u.rows(); ++i) {
      const double x = std::fabs(u(i, j));
      if (x > best) {
        best = x;
        imax = i;
      }
    }
    if (u(imax, j) < 0.0) {
      for (Index i = 0; i < u.rows(); ++i) u(i, j) = -u(i, j);
      for (Index i = 0; i < v.rows(); ++i) v(i, j) = -v(i, j);
    }
  }
}

}  // namespace

ThinQR qr_thin(const Matrix& a) {
  const Index n = a.rows();
  const Index k = a.cols();
  if (n < k) throw std::invalid_argument("qr_thin: requires rows >= cols");

  Matrix w = a;
  Matrix vs(n, k);  // Householder vectors, column j zero above row j
  std::vector<double> betas(k, 0.0);

  for (Index j = 0; j < k; ++j) {
    double normx = 0.0;
    for (Index i = j; i < n; ++i) normx += w(i, j) * w(i, j);
    normx = std::sqrt(normx);
    if (normx == 0.0) continue;

    const double alpha = (w(j, j) >= 0.0) ? -normx : normx;
    double vnorm2 = 0.0;
    vs(j, j) = w(j, j) - alpha;
    vnorm2 += vs(j, j) * vs(j, j);
    for (Index i = j + 1; i < n; ++i) {
      vs(i, j) = w(i, j);
      vnorm2 += vs(i, j) * vs(i, j);
    }
    if (vnorm2 == 0.0) continue;
    betas[j] = 2.0 / vnorm2;

    // Apply I - beta v v^T to the trailing columns of w.
    for (Index c = j; c < k; ++c) {
      double proj = 0.0;
      for (Index i = j; i < n; ++i) proj += vs(i, j) * w(i, c);
      proj *= betas[j];
      for (Index i = j; i < n; ++i) w(i, c) -= proj * vs(i, j);
    }
    flops::add(static_cast<std::uint64_t>(2 * (n - j) * (k - j)));
  }

  ThinQR out;
  out.r = Matrix(k, k);
  for (Index j = 0; j < k; ++j)
    for (Index i = 0; i <= j; ++i) out.r(i, j) = w(i, j);

  // Back-accumulate Q on the first k columns of the identity.
  out.q = Matrix(n, k);
  for (Index j = 0; j < k; ++j) out.q(j, j) = 1.0;
  for (Index j = k - 1; j >= 0; --j) {
    if (betas[j] == 0.0) continue;
    for (Index c = 0; c < k; ++c) {
      double proj = 0.0;
      for (Index i = j; i < n; ++i) proj += vs(i, j) * out.q(i, c);
      proj *= betas[j];
      for (Index i = j; i < n; ++i) out.q(i, c) -= proj * vs(i, j);
    }
    flops::add(static_cast<std::uint64_t>(2 * (n - j) * k));
  }

  // Nonnegative diagonal of R.
  for (Index j = 0; j < k; ++j) {
    if (out.r(j, j) < 0.0) {
      for (Index c = j; c < k; ++c) out.r(j, c) = -out.r(j, c);
      for (Index i = 0; i < n; ++i) out.q(i, j) = -out.q(i, j);
    }
  }
  return out;
}

TruncatedSVD svd_truncated(const Matrix& a, Index r) {
  const Index minmn = std::min(a.rows(), a.cols());
  if (r < 0 || r > minmn)
    throw std::invalid_argument("svd_truncated: rank exceeds min dimension");

  Matrix u, v;
  std::vector<double> s;
  if (a.rows() >= a.cols()) {
    svd_tall(a, u, s, v);
  } else {
    svd_tall(transpose(a), v, s, u);  // a = (u')(s)(v')^T of the transpose, swapped
  }

  TruncatedSVD out;
  out.u = left_cols(u, r);
  out.v = left_cols(v, r);
  out.s.assign(s.begin(), s.begin() + r);
  apply_sign_convention(out.u, out.v);
  return out;
}

std::vector<double> singular_values(const Matrix& a) {
  Matrix w = (a.rows() >= a.cols()) ? a : transpose(a);
  jacobi_orthogonalize(w, nullptr);
  std::vector<double> s(w.cols());
  for (Index j = 0; j < w.cols(); ++j) {
    double acc = 0.0;
    const double* wj = w.col(j);
    for (Index i = 0; i < w.rows(); ++i) acc += wj[i] * wj[i];
    s[j] = std::sqrt(acc);
  }
  std::sort(s.begin(), s.end(), std::greater<double>());
  return s;
}

Matrix pinv(const Matrix& a, double tol) {
  const Index minmn = std::min(a.rows(), a.cols());
  TruncatedSVD svd = svd_truncated(a, minmn);
  const double smax = svd.s.empty() ? 0.0 : svd.s.front();
  Matrix vsi(a.cols(), minmn);
  for (Index j = 0; j < minmn; ++j) {
    const double inv = (svd.s[j] > tol * smax && svd.s[j] > 0.0) ? 1.0 / svd.s[j] : 0.0;
    for (Index i = 0; i < a.cols(); ++i) vsi(i, j) = svd.v(i, j) * inv;
  }
  return matmul_nt(vsi, svd.u);
}

}  // namespace trec::linalg
