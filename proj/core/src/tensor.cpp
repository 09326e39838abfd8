#include "tempogan/tensor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <omp.h>

namespace tempogan {

namespace {

template <typename T>
using MatMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>, 0,
                          Eigen::OuterStride<>>;
template <typename T>
using CMatMap = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>,
                           0, Eigen::OuterStride<>>;

} // namespace

template <typename T>
void gemm(bool trans_a, bool trans_b, int m, int n, int k, T alpha, const T* a, int lda,
          const T* b, int ldb, T beta, T* c, int ldc) {
    if (m <= 0 || n <= 0) return;
    // split rows of C across threads; each output element is produced by one
    // thread with an identical reduction order, so results do not depend on
    // the thread count
    const int max_threads = std::min(omp_get_max_threads(), std::max(1, m / 16));
    const int chunks = std::max(1, max_threads);
#pragma omp parallel for schedule(static) num_threads(chunks)
    for (int chunk = 0; chunk < chunks; ++chunk) {
        const int r0 = int(std::size_t(chunk) * std::size_t(m) / std::size_t(chunks));
        const int r1 = int(std::size_t(chunk + 1) * std::size_t(m) / std::size_t(chunks));
        const int rows = r1 - r0;
        if (rows <= 0) continue;
        MatMap<T> C(c + std::size_t(r0) * std::size_t(ldc), rows, n, Eigen::OuterStride<>(ldc));
        auto run = [&](const auto& A, const auto& B) {
            if (beta == T(0)) {
                if (alpha == T(1))
                    C.noalias() = A * B;
                else
                    C.noalias() = alpha * (A * B);
            } else {
                C *= beta;
                C.noalias() += alpha * (A * B);
            }
        };
        if (!trans_a && !trans_b) {
            CMatMap<T> A(a + std::size_t(r0) * std::size_t(lda), rows, k, Eigen::OuterStride<>(lda));
            CMatMap<T> B(b, k, n, Eigen::OuterStride<>(ldb));
            run(A, B);
        } else if (trans_a && !trans_b) {
            CMatMap<T> A(a + r0, k, rows, Eigen::OuterStride<>(lda));
            CMatMap<T> B(b, k, n, Eigen::OuterStride<>(ldb));
            run(A.transpose(), B);
        } else if (!trans_a && trans_b) {
            CMatMap<T> A(a + std::size_t(r0) * std::size_t(lda), rows, k, Eigen::OuterStride<>(lda));
            CMatMap<T> B(b, n, k, Eigen::OuterStride<>(ldb));
            run(A, B.transpose());
        } else {
            CMatMap<T> A(a + r0, k, rows, Eigen::OuterStride<>(lda));
            CMatMap<T> B(b, n, k, Eigen::OuterStride<>(ldb));
            run(A.transpose(), B.transpose());
        }
    }
}

template <typename T>
void axpy(std::size_t n, T alpha, const T* x, T* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template void gemm<float>(bool, bool, int, int, int, float, const float*, int, const float*, int,
                          float, float*, int);
template void gemm<double>(bool, bool, int, int, int, double, const double*, int, const double*,
                           int, double, double*, int);
template void axpy<float>(std::size_t, float, const float*, float*);
template void axpy<double>(std::size_t, double, const double*, double*);

} // namespace tempogan
