#pragma once

#include <cstdint>

namespace trec::kernels {

using Index = std::int64_t;

/// Runtime switch between the serial reference kernels and the OpenMP ones.
/// Both variants compute every output element with the same accumulation
/// order, so results are bit-identical for any thread count.
bool parallel_enabled();
void set_parallel(bool on);

// Serial reference implementations. Kept as the ground truth the parallel
// kernels are tested against.
namespace serial {

// C (m x p) = A (m x k) * B (k x p); all matrices column-major, contiguous.
void gemm_nn(Index m, Index k, Index p, const double* a, const double* b, double* c);
// C (m x p) = A^T * B with A stored (k x m), B (k x p).
void gemm_tn(Index m, Index k, Index p, const double* a, const double* b, double* c);
// C (m x p) = A * B^T with A (m x k), B (p x k).
void gemm_nt(Index m, Index k, Index p, const double* a, const double* b, double* c);

// y += alpha * x
void axpy(Index n, double alpha, const double* x, double* y);
// z = x + alpha * y (z may alias x)
void add_scaled(Index n, const double* x, double alpha, const double* y, double* z);

// Y[l, j, rb] = sum_c U(j, c) * X[l, c, rb], with X viewed as
// (left x nk x right) in canonical (first-fastest) order and U (m x nk).
void mode_apply(Index left, Index nk, Index right, Index m,
                const double* u, const double* x, double* y);

}  // namespace serial

// OpenMP implementations; identical per-element arithmetic, work distributed
// over independent output columns.
namespace par {

void gemm_nn(Index m, Index k, Index p, const double* a, const double* b, double* c);
void gemm_tn(Index m, Index k, Index p, const double* a, const double* b, double* c);
void gemm_nt(Index m, Index k, Index p, const double* a, const double* b, double* c);
void axpy(Index n, double alpha, const double* x, double* y);
void add_scaled(Index n, const double* x, double alpha, const double* y, double* z);
void mode_apply(Index left, Index nk, Index right, Index m,
                const double* u, const double* x, double* y);

}  // namespace par

// Dispatching entry points used by the rest of the library.
void gemm_nn(Index m, Index k, Index p, const double* a, const double* b, double* c);
void gemm_tn(Index m, Index k, Index p, const double* a, const double* b, double* c);
void gemm_nt(Index m, Index k, Index p, const double* a, const double* b, double* c);
void axpy(Index n, double alpha, const double* x, double* y);
void add_scaled(Index n, const double* x, double alpha, const double* y, double* z);
void mode_apply(Index left, Index nk, Index right, Index m,
                const double* u, const double* x, double* y);

// Serial reduction; fixed summation order regardless of the parallel switch.
double dot(Index n, const double* x, const double* y);

}  // namespace trec::kernels
