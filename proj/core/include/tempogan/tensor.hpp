#pragma once

#include <cstddef>
#include <vector>

namespace tempogan {

//! Dense row-major tensor, laid out (N, C, spatial...). Templated on the
//! scalar so the float32 training path has an exact float64 twin for
//! finite-difference checks.
template <typename T>
struct Tensor {
    std::vector<int> shape;
    std::vector<T> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s, T fill = T(0)) : shape(std::move(s)) {
        data.assign(count(shape), fill);
    }

    static std::size_t count(const std::vector<int>& s) {
        std::size_t n = 1;
        for (int v : s) n *= std::size_t(v);
        return n;
    }

    std::size_t size() const { return data.size(); }
    int n() const { return shape.empty() ? 0 : shape[0]; }
    int channels() const { return shape.size() < 2 ? 0 : shape[1]; }
    //! Product of dims after (N, C).
    std::size_t spatial() const {
        std::size_t p = 1;
        for (std::size_t i = 2; i < shape.size(); ++i) p *= std::size_t(shape[i]);
        return p;
    }
    //! Spatial extents only.
    std::vector<int> spatial_shape() const {
        return {shape.begin() + 2, shape.end()};
    }

    T* sample(int i) { return data.data() + std::size_t(i) * std::size_t(channels()) * spatial(); }
    const T* sample(int i) const {
        return data.data() + std::size_t(i) * std::size_t(channels()) * spatial();
    }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

//! C = alpha * op(A) * op(B) + beta * C with row-major matrices, split across
//! threads by rows of C (deterministic for any thread count).
template <typename T>
void gemm(bool trans_a, bool trans_b, int m, int n, int k, T alpha, const T* a, int lda,
          const T* b, int ldb, T beta, T* c, int ldc);

//! Sum over the batch of per-sample outer products is folded into gemm by
//! concatenating samples along the shared axis; helpers for elementwise ops.
template <typename T>
void axpy(std::size_t n, T alpha, const T* x, T* y);

} // namespace tempogan
