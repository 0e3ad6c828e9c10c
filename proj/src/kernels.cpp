#include "trec/kernels.hpp"

#include <algorithm>
#include <atomic>

namespace trec::kernels {

namespace {

std::atomic<bool> g_parallel{true};

// Per-column bodies shared by the serial and OpenMP variants. Each output
// column is produced by exactly one thread with a fixed accumulation order,
// which is what makes the two variants bit-identical.

inline void gemm_nn_col(Index m, Index k, const double* a, const double* bcol, double* ccol) {
  std::fill(ccol, ccol + m, 0.0);
  for (Index l = 0; l < k; ++l) {
    const double bl = bcol[l];
    const double* acol = a + l * m;
    for (Index i = 0; i < m; ++i) ccol[i] += acol[i] * bl;
  }
}

inline void gemm_tn_col(Index m, Index k, const double* a, const double* bcol, double* ccol) {
  for (Index i = 0; i < m; ++i) {
    const double* acol = a + i * k;
    double s = 0.0;
    for (Index l = 0; l < k; ++l) s += acol[l] * bcol[l];
    ccol[i] = s;
  }
}

inline void gemm_nt_col(Index m, Index k, Index p, const double* a, const double* b,
                        Index j, double* ccol) {
  std::fill(ccol, ccol + m, 0.0);
  for (Index l = 0; l < k; ++l) {
    const double bjl = b[l * p + j];
    const double* acol = a + l * m;
    for (Index i = 0; i < m; ++i) ccol[i] += acol[i] * bjl;
  }
}

inline void mode_apply_col(Index left, Index nk, const double* u, Index m,
                           const double* xblk, Index j, double* ycol) {
  std::fill(ycol, ycol + left, 0.0);
  for (Index c = 0; c < nk; ++c) {
    const double w = u[c * m + j];
    const double* xcol = xblk + c * left;
    for (Index i = 0; i < left; ++i) ycol[i] += xcol[i] * w;
  }
}

}  // namespace

bool parallel_enabled() { return g_parallel.load(std::memory_order_relaxed); }
void set_parallel(bool on) { g_parallel.store(on, std::memory_order_relaxed); }

namespace serial {

void gemm_nn(Index m, Index k, Index p, const double* a, const double* b, double* c) {
  for (Index j = 0; j < p; ++j) gemm_nn_col(m, k, a, b + j * k, c + j * m);
}

void gemm_tn(Index m, Index k, Index p, const double* a, const double* b, double* c) {
  for (Index j = 0; j < p; ++j) gemm_tn_col(m, k, a, b + j * k, c + j * m);
}

void gemm_nt(Index m, Index k, Index p, const double* a, const double* b, double* c) {
  for (Index j = 0; j < p; ++j) gemm_nt_col(m, k, p, a, b, j, c + j * m);
}

void axpy(Index n, double alpha, const double* x, double* y) {
  for (Index i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void add_scaled(Index n, const double* x, double alpha, const double* y, double* z) {
  for (Index i = 0; i < n; ++i) z[i] = x[i] + alpha * y[i];
}

void mode_apply(Index left, Index nk, Index right, Index m,
                const double* u, const double* x, double* y) {
  for (Index rb = 0; rb < right; ++rb)
    for (Index j = 0; j < m; ++j)
      mode_apply_col(left, nk, u, m, x + rb * left * nk, j, y + (rb * m + j) * left);
}

}  // namespace serial

namespace par {

void gemm_nn(Index m, Index k, Index p, const double* a, const double* b, double* c) {
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < p; ++j) gemm_nn_col(m, k, a, b + j * k, c + j * m);
}

void gemm_tn(Index m, Index k, Index p, const double* a, const double* b, double* c) {
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < p; ++j) gemm_tn_col(m, k, a, b + j * k, c + j * m);
}

void gemm_nt(Index m, Index k, Index p, const double* a, const double* b, double* c) {
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < p; ++j) gemm_nt_col(m, k, p, a, b, j, c + j * m);
}

void axpy(Index n, double alpha, const double* x, double* y) {
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void add_scaled(Index n, const double* x, double alpha, const double* y, double* z) {
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) z[i] = x[i] + alpha * y[i];
}

void mode_apply(Index left, Index nk, Index right, Index m,
                const double* u, const double* x, double* y) {
#pragma omp parallel for schedule(static) collapse(2)
  for (Index rb = 0; rb < right; ++rb)
    for (Index j = 0; j < m; ++j)
      mode_apply_col(left, nk, u, m, x + rb * left * nk, j, y + (rb * m + j) * left);
}

}  // namespace par

void gemm_nn(Index m, Index k, Index p, const double* a, const double* b, double* c) {
  parallel_enabled() ? par::gemm_nn(m, k, p, a, b, c) : serial::gemm_nn(m, k, p, a, b, c);
}

void gemm_tn(Index m, Index k, Index p, const double* a, const double* b, double* c) {
  parallel_enabled() ? par::gemm_tn(m, k, p, a, b, c) : serial::gemm_tn(m, k, p, a, b, c);
}

void gemm_nt(Index m, Index k, Index p, const double* a, const double* b, double* c) {
  parallel_enabled() ? par::gemm_nt(m, k, p, a, b, c) : serial::gemm_nt(m, k, p, a, b, c);
}

void axpy(Index n, double alpha, const double* x, double* y) {
  parallel_enabled() ? par::axpy(n, alpha, x, y) : serial::axpy(n, alpha, x, y);
}

void add_scaled(Index n, const double* x, double alpha, const double* y, double* z) {
  parallel_enabled() ? par::add_scaled(n, x, alpha, y, z)
                     : serial::add_scaled(n, x, alpha, y, z);
}

void mode_apply(Index left, Index nk, Index right, Index m,
                const double* u, const double* x, double* y) {
  parallel_enabled() ? par::mode_apply(left, nk, right, m, u, x, y)
                     : serial::mode_apply(left, nk, right, m, u, x, y);
}

double dot(Index n, const double* x, const double* y) {
  double s = 0.0;
  for (Index i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

}  // namespace trec::kernels
