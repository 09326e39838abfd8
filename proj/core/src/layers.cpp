#include "tempogan/layers.hpp"

#include <algorithm>
#include <cmath>
#include <omp.h>
#include <stdexcept>

namespace tempogan {

namespace {

struct PadInfo {
    int out[3] = {1, 1, 1};
    int pad_lo[3] = {0, 0, 0};
};

PadInfo same_padding(const std::vector<int>& spatial, int k, int stride) {
    PadInfo p;
    for (std::size_t a = 0; a < spatial.size(); ++a) {
        const int in = spatial[a];
        const int out = (in + stride - 1) / stride;
        const int total = std::max(0, (out - 1) * stride + k - in);
        p.out[a] = out;
        p.pad_lo[a] = total / 2;
    }
    return p;
}

// col is K x (N*P) with K = in_ch * k^rank; one sample's columns are
// [s*P, (s+1)*P). Writes every entry, so the buffer needs no pre-zeroing.
// x0/x1 restrict the output rows along the first spatial axis so large
// single-sample inference can run in bands.
template <typename T>
void im2col_sample(const Tensor<T>& x, int s, int k, int stride, const PadInfo& pad, T* col,
                   std::size_t col_ld, int x0 = 0, int x1 = -1) {
    const int rank = int(x.shape.size()) - 2;
    const int cin = x.channels();
    const T* xs = x.sample(s);
    if (x1 < 0) x1 = pad.out[0];
    if (rank == 2) {
        const int ix = x.shape[2], iy = x.shape[3];
        const int oy = pad.out[1];
        for (int ci = 0; ci < cin; ++ci) {
            const T* plane = xs + std::size_t(ci) * std::size_t(ix) * std::size_t(iy);
            for (int kx = 0; kx < k; ++kx)
                for (int ky = 0; ky < k; ++ky) {
                    T* row = col + (std::size_t(ci) * std::size_t(k) * std::size_t(k) +
                                    std::size_t(kx) * std::size_t(k) + std::size_t(ky)) *
                                       col_ld;
                    std::size_t cidx = 0;
                    for (int px = x0; px < x1; ++px) {
                        const int sx = px * stride - pad.pad_lo[0] + kx;
                        const bool x_ok = sx >= 0 && sx < ix;
                        for (int py = 0; py < oy; ++py, ++cidx) {
                            const int sy = py * stride - pad.pad_lo[1] + ky;
                            row[cidx] = (x_ok && sy >= 0 && sy < iy)
                                            ? plane[std::size_t(sx) * std::size_t(iy) + std::size_t(sy)]
                                            : T(0);
                        }
                    }
                }
        }
    } else {
        const int ix = x.shape[2], iy = x.shape[3], iz = x.shape[4];
        const int oy = pad.out[1], oz = pad.out[2];
        for (int ci = 0; ci < cin; ++ci) {
            const T* plane = xs + std::size_t(ci) * std::size_t(ix) * std::size_t(iy) * std::size_t(iz);
            for (int kx = 0; kx < k; ++kx)
                for (int ky = 0; ky < k; ++ky)
                    for (int kz = 0; kz < k; ++kz) {
                        T* row = col + (((std::size_t(ci) * std::size_t(k) + std::size_t(kx)) * std::size_t(k) +
                                         std::size_t(ky)) *
                                            std::size_t(k) +
                                        std::size_t(kz)) *
                                           col_ld;
                        std::size_t cidx = 0;
                        for (int px = x0; px < x1; ++px) {
                            const int sx = px * stride - pad.pad_lo[0] + kx;
                            const bool okx = sx >= 0 && sx < ix;
                            for (int py = 0; py < oy; ++py) {
                                const int sy = py * stride - pad.pad_lo[1] + ky;
                                const bool oky = okx && sy >= 0 && sy < iy;
                                for (int pz = 0; pz < oz; ++pz, ++cidx) {
                                    const int sz = pz * stride - pad.pad_lo[2] + kz;
                                    row[cidx] =
                                        (oky && sz >= 0 && sz < iz)
                                            ? plane[(std::size_t(sx) * std::size_t(iy) + std::size_t(sy)) *
                                                        std::size_t(iz) +
                                                    std::size_t(sz)]
                                            : T(0);
                                }
                            }
                        }
                    }
        }
    }
}

template <typename T>
void col2im_sample(const T* col, std::size_t col_ld, int k, int stride, const PadInfo& pad,
                   Tensor<T>& gx, int s) {
    const int rank = int(gx.shape.size()) - 2;
    const int cin = gx.channels();
    T* xs = gx.sample(s);
    if (rank == 2) {
        const int ix = gx.shape[2], iy = gx.shape[3];
        const int ox = pad.out[0], oy = pad.out[1];
        for (int ci = 0; ci < cin; ++ci) {
            T* plane = xs + std::size_t(ci) * std::size_t(ix) * std::size_t(iy);
            for (int kx = 0; kx < k; ++kx)
                for (int ky = 0; ky < k; ++ky) {
                    const T* row = col + (std::size_t(ci) * std::size_t(k) * std::size_t(k) +
                                          std::size_t(kx) * std::size_t(k) + std::size_t(ky)) *
                                             col_ld;
                    std::size_t cidx = 0;
                    for (int px = 0; px < ox; ++px) {
                        const int sx = px * stride - pad.pad_lo[0] + kx;
                        const bool x_ok = sx >= 0 && sx < ix;
                        for (int py = 0; py < oy; ++py, ++cidx) {
                            const int sy = py * stride - pad.pad_lo[1] + ky;
                            if (x_ok && sy >= 0 && sy < iy)
                                plane[std::size_t(sx) * std::size_t(iy) + std::size_t(sy)] += row[cidx];
                        }
                    }
                }
        }
    } else {
        const int ix = gx.shape[2], iy = gx.shape[3], iz = gx.shape[4];
        const int ox = pad.out[0], oy = pad.out[1], oz = pad.out[2];
        for (int ci = 0; ci < cin; ++ci) {
            T* plane = xs + std::size_t(ci) * std::size_t(ix) * std::size_t(iy) * std::size_t(iz);
            for (int kx = 0; kx < k; ++kx)
                for (int ky = 0; ky < k; ++ky)
                    for (int kz = 0; kz < k; ++kz) {
                        const T* row = col + (((std::size_t(ci) * std::size_t(k) + std::size_t(kx)) * std::size_t(k) +
                                               std::size_t(ky)) *
                                                  std::size_t(k) +
                                              std::size_t(kz)) *
                                                 col_ld;
                        std::size_t cidx = 0;
                        for (int px = 0; px < ox; ++px) {
                            const int sx = px * stride - pad.pad_lo[0] + kx;
                            const bool okx = sx >= 0 && sx < ix;
                            for (int py = 0; py < oy; ++py) {
                                const int sy = py * stride - pad.pad_lo[1] + ky;
                                const bool oky = okx && sy >= 0 && sy < iy;
                                for (int pz = 0; pz < oz; ++pz, ++cidx) {
                                    const int sz = pz * stride - pad.pad_lo[2] + kz;
                                    if (oky && sz >= 0 && sz < iz)
                                        plane[(std::size_t(sx) * std::size_t(iy) + std::size_t(sy)) *
                                                  std::size_t(iz) +
                                              std::size_t(sz)] += row[cidx];
                                }
                            }
                        }
                    }
        }
    }
}

template <typename T>
std::vector<T>& col_scratch() {
    static thread_local std::vector<T> buf;
    return buf;
}

} // namespace

template <typename T>
void Conv<T>::init(int rank_, int in_c, int out_c, int k, int s, Rng& rng, T init_std) {
    rank = rank_;
    in_ch = in_c;
    out_ch = out_c;
    kernel = k;
    stride = s;
    std::size_t kv = 1;
    for (int a = 0; a < rank; ++a) kv *= std::size_t(k);
    w.resize(std::size_t(out_c) * std::size_t(in_c) * kv);
    for (T& v : w) v = T(rng.normal()) * init_std;
    b.assign(std::size_t(out_c), T(0));
    gw.assign(w.size(), T(0));
    gb.assign(b.size(), T(0));
}

template <typename T>
std::vector<int> Conv<T>::out_shape(const std::vector<int>& in_shape) const {
    PadInfo pad = same_padding({in_shape.begin() + 2, in_shape.end()}, kernel, stride);
    std::vector<int> out = {in_shape[0], out_ch};
    for (std::size_t a = 0; a + 2 < in_shape.size(); ++a) out.push_back(pad.out[a]);
    return out;
}

template <typename T>
Tensor<T> Conv<T>::forward(const Tensor<T>& x) const {
    if (x.channels() != in_ch) throw std::runtime_error("Conv: channel mismatch");
    const int N = x.n();
    PadInfo pad = same_padding(x.spatial_shape(), kernel, stride);
    Tensor<T> y(out_shape(x.shape));
    const std::size_t P = y.spatial();
    std::size_t K = std::size_t(in_ch);
    for (int a = 0; a < rank; ++a) K *= std::size_t(kernel);

    std::vector<T>& col = col_scratch<T>();

    // large single inputs (inference) run in bands of output rows to keep the
    // im2col buffer bounded
    constexpr std::size_t kMaxCols = 8192;
    if (N == 1 && P > kMaxCols) {
        const std::size_t row_P = P / std::size_t(pad.out[0]);
        const int band = std::max(1, int(kMaxCols / row_P));
        col.resize(K * std::size_t(band) * row_P);
        for (int x0 = 0; x0 < pad.out[0]; x0 += band) {
            const int x1 = std::min(pad.out[0], x0 + band);
            const std::size_t cols = std::size_t(x1 - x0) * row_P;
            im2col_sample(x, 0, kernel, stride, pad, col.data(), cols, x0, x1);
            // write into the output columns of this band (leading dim P)
            gemm<T>(false, false, out_ch, int(cols), int(K), T(1), w.data(), int(K), col.data(),
                    int(cols), T(0), y.sample(0) + std::size_t(x0) * row_P, int(P));
        }
    } else if (N == 1) {
        col.resize(K * P);
        im2col_sample(x, 0, kernel, stride, pad, col.data(), P);
        gemm<T>(false, false, out_ch, int(P), int(K), T(1), w.data(), int(K), col.data(), int(P),
                T(0), y.sample(0), int(P));
    } else {
        const std::size_t col_ld = P * std::size_t(N);
        col.resize(K * col_ld);
#pragma omp parallel for schedule(static)
        for (int s = 0; s < N; ++s)
            im2col_sample(x, s, kernel, stride, pad, col.data() + std::size_t(s) * P, col_ld);
        // one GEMM per sample, parallel across samples (inner gemm stays
        // single-threaded because nesting is disabled)
#pragma omp parallel for schedule(static)
        for (int s = 0; s < N; ++s)
            gemm<T>(false, false, out_ch, int(P), int(K), T(1), w.data(), int(K),
                    col.data() + std::size_t(s) * P, int(col_ld), T(0), y.sample(s), int(P));
    }
    // bias
#pragma omp parallel for schedule(static) collapse(2)
    for (int s = 0; s < N; ++s)
        for (int c = 0; c < out_ch; ++c) {
            T* dst = y.sample(s) + std::size_t(c) * P;
            const T bias = b[std::size_t(c)];
            for (std::size_t p = 0; p < P; ++p) dst[p] += bias;
        }
    return y;
}

template <typename T>
void Conv<T>::backward(const Tensor<T>& x, const Tensor<T>& gy, Tensor<T>* gx,
                       bool accumulate_params) {
    const int N = x.n();
    PadInfo pad = same_padding(x.spatial_shape(), kernel, stride);
    const std::size_t P = gy.spatial();
    std::size_t K = std::size_t(in_ch);
    for (int a = 0; a < rank; ++a) K *= std::size_t(kernel);
    const std::size_t col_ld = P * std::size_t(N);

    std::vector<T>& col = col_scratch<T>();
    col.resize(K * col_ld);
#pragma omp parallel for schedule(static)
    for (int s = 0; s < N; ++s)
        im2col_sample(x, s, kernel, stride, pad, col.data() + std::size_t(s) * P, col_ld);

    if (accumulate_params) {
        // dW rows split across threads; every thread loops samples in order,
        // so accumulation order is fixed
        const int chunks = std::min(omp_get_max_threads(), std::max(1, out_ch / 8));
#pragma omp parallel for schedule(static)
        for (int chunk = 0; chunk < chunks; ++chunk) {
            const int r0 = out_ch * chunk / chunks;
            const int r1 = out_ch * (chunk + 1) / chunks;
            if (r1 <= r0) continue;
            for (int s = 0; s < N; ++s)
                gemm<T>(false, true, r1 - r0, int(K), int(P), T(1),
                        gy.sample(s) + std::size_t(r0) * P, int(P), col.data() + std::size_t(s) * P,
                        int(col_ld), T(1), gw.data() + std::size_t(r0) * K, int(K));
        }
        for (int c = 0; c < out_ch; ++c) {
            T acc = T(0);
            for (int s = 0; s < N; ++s) {
                const T* src = gy.sample(s) + std::size_t(c) * P;
                for (std::size_t p = 0; p < P; ++p) acc += src[p];
            }
            gb[std::size_t(c)] += acc;
        }
    }

    if (gx) {
        *gx = Tensor<T>(x.shape);
        // dcol = W^T gy, reusing col as the destination
        if (N == 1) {
            gemm<T>(true, false, int(K), int(P), out_ch, T(1), w.data(), int(K), gy.sample(0),
                    int(P), T(0), col.data(), int(P));
            col2im_sample(col.data(), P, kernel, stride, pad, *gx, 0);
        } else {
#pragma omp parallel for schedule(static)
            for (int s = 0; s < N; ++s) {
                gemm<T>(true, false, int(K), int(P), out_ch, T(1), w.data(), int(K), gy.sample(s),
                        int(P), T(0), col.data() + std::size_t(s) * P, int(col_ld));
            }
#pragma omp parallel for schedule(static)
            for (int s = 0; s < N; ++s)
                col2im_sample(col.data() + std::size_t(s) * P, col_ld, kernel, stride, pad, *gx, s);
        }
    }
}

template <typename T>
void Conv<T>::zero_grad() {
    std::fill(gw.begin(), gw.end(), T(0));
    std::fill(gb.begin(), gb.end(), T(0));
}

template <typename T>
void BatchNorm<T>::init(int c, T eps_, T momentum_) {
    channels = c;
    eps = eps_;
    momentum = momentum_;
    gamma.assign(std::size_t(c), T(1));
    beta.assign(std::size_t(c), T(0));
    ggamma.assign(std::size_t(c), T(0));
    gbeta.assign(std::size_t(c), T(0));
    running_mean.assign(std::size_t(c), T(0));
    running_var.assign(std::size_t(c), T(1));
}

template <typename T>
Tensor<T> BatchNorm<T>::forward(const Tensor<T>& x, NetMode mode, bool update_running,
                                BNCache<T>& cache) {
    if (x.channels() != channels) throw std::runtime_error("BatchNorm: channel mismatch");
    const int N = x.n();
    const std::size_t S = x.spatial();
    const std::size_t plane = S;
    Tensor<T> y(x.shape);
    cache.xhat = Tensor<T>(x.shape);
    cache.invstd.assign(std::size_t(channels), T(0));
    cache.training = (mode == NetMode::train);

#pragma omp parallel for schedule(static)
    for (int c = 0; c < channels; ++c) {
        T mean, var;
        if (mode == NetMode::train) {
            double sum = 0.0, sum2 = 0.0;
            for (int s = 0; s < N; ++s) {
                const T* src = x.sample(s) + std::size_t(c) * plane;
                for (std::size_t p = 0; p < plane; ++p) {
                    sum += double(src[p]);
                    sum2 += double(src[p]) * double(src[p]);
                }
            }
            const double m = double(N) * double(plane);
            mean = T(sum / m);
            var = T(std::max(0.0, sum2 / m - (sum / m) * (sum / m)));
        } else {
            mean = running_mean[std::size_t(c)];
            var = running_var[std::size_t(c)];
        }
        const T inv = T(1) / std::sqrt(var + eps);
        cache.invstd[std::size_t(c)] = inv;
        const T g = gamma[std::size_t(c)], be = beta[std::size_t(c)];
        for (int s = 0; s < N; ++s) {
            const T* src = x.sample(s) + std::size_t(c) * plane;
            T* xh = cache.xhat.sample(s) + std::size_t(c) * plane;
            T* dst = y.sample(s) + std::size_t(c) * plane;
            for (std::size_t p = 0; p < plane; ++p) {
                xh[p] = (src[p] - mean) * inv;
                dst[p] = g * xh[p] + be;
            }
        }
        if (mode == NetMode::train && update_running) {
            running_mean[std::size_t(c)] = momentum * running_mean[std::size_t(c)] + (T(1) - momentum) * mean;
            running_var[std::size_t(c)] = momentum * running_var[std::size_t(c)] + (T(1) - momentum) * var;
        }
    }
    return y;
}

template <typename T>
Tensor<T> BatchNorm<T>::backward(const Tensor<T>& gy, const BNCache<T>& cache,
                                 bool accumulate_params) {
    const int N = gy.n();
    const std::size_t plane = gy.spatial();
    Tensor<T> gx(gy.shape);
    const double m = double(N) * double(plane);

#pragma omp parallel for schedule(static)
    for (int c = 0; c < channels; ++c) {
        double sum_gy = 0.0, sum_gy_xhat = 0.0;
        for (int s = 0; s < N; ++s) {
            const T* g = gy.sample(s) + std::size_t(c) * plane;
            const T* xh = cache.xhat.sample(s) + std::size_t(c) * plane;
            for (std::size_t p = 0; p < plane; ++p) {
                sum_gy += double(g[p]);
                sum_gy_xhat += double(g[p]) * double(xh[p]);
            }
        }
        if (accumulate_params) {
            ggamma[std::size_t(c)] += T(sum_gy_xhat);
            gbeta[std::size_t(c)] += T(sum_gy);
        }
        const T g0 = gamma[std::size_t(c)];
        const T inv = cache.invstd[std::size_t(c)];
        if (cache.training) {
            const T k1 = T(sum_gy / m), k2 = T(sum_gy_xhat / m);
            for (int s = 0; s < N; ++s) {
                const T* g = gy.sample(s) + std::size_t(c) * plane;
                const T* xh = cache.xhat.sample(s) + std::size_t(c) * plane;
                T* dst = gx.sample(s) + std::size_t(c) * plane;
                for (std::size_t p = 0; p < plane; ++p)
                    dst[p] = g0 * inv * (g[p] - k1 - xh[p] * k2);
            }
        } else {
            for (int s = 0; s < N; ++s) {
                const T* g = gy.sample(s) + std::size_t(c) * plane;
                T* dst = gx.sample(s) + std::size_t(c) * plane;
                for (std::size_t p = 0; p < plane; ++p) dst[p] = g0 * inv * g[p];
            }
        }
    }
    return gx;
}

template <typename T>
void BatchNorm<T>::zero_grad() {
    std::fill(ggamma.begin(), ggamma.end(), T(0));
    std::fill(gbeta.begin(), gbeta.end(), T(0));
}

template <typename T>
void Dense<T>::init(int in_f, int out_f, Rng& rng, T init_std) {
    in_features = in_f;
    out_features = out_f;
    w.resize(std::size_t(out_f) * std::size_t(in_f));
    for (T& v : w) v = T(rng.normal()) * init_std;
    b.assign(std::size_t(out_f), T(0));
    gw.assign(w.size(), T(0));
    gb.assign(b.size(), T(0));
}

template <typename T>
Tensor<T> Dense<T>::forward(const Tensor<T>& x) const {
    const int N = x.n();
    if (int(x.size() / std::size_t(N)) != in_features)
        throw std::runtime_error("Dense: feature size mismatch");
    Tensor<T> y({N, out_features});
    gemm<T>(false, true, N, out_features, in_features, T(1), x.data.data(), in_features, w.data(),
            in_features, T(0), y.data.data(), out_features);
    for (int s = 0; s < N; ++s)
        for (int c = 0; c < out_features; ++c) y.data[std::size_t(s) * out_features + c] += b[std::size_t(c)];
    return y;
}

template <typename T>
void Dense<T>::backward(const Tensor<T>& x, const Tensor<T>& gy, Tensor<T>* gx,
                        bool accumulate_params) {
    const int N = x.n();
    if (accumulate_params) {
        gemm<T>(true, false, out_features, in_features, N, T(1), gy.data.data(), out_features,
                x.data.data(), in_features, T(1), gw.data(), in_features);
        for (int c = 0; c < out_features; ++c) {
            T acc = T(0);
            for (int s = 0; s < N; ++s) acc += gy.data[std::size_t(s) * out_features + c];
            gb[std::size_t(c)] += acc;
        }
    }
    if (gx) {
        *gx = Tensor<T>(x.shape);
        gemm<T>(false, false, N, in_features, out_features, T(1), gy.data.data(), out_features,
                w.data(), in_features, T(0), gx->data.data(), in_features);
    }
}

template <typename T>
void Dense<T>::zero_grad() {
    std::fill(gw.begin(), gw.end(), T(0));
    std::fill(gb.begin(), gb.end(), T(0));
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
    Tensor<T> y(x.shape);
    const std::size_t n = x.size();
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < (long long)n; ++i)
        y.data[std::size_t(i)] = x.data[std::size_t(i)] > T(0) ? x.data[std::size_t(i)] : T(0);
    return y;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& gy, const Tensor<T>& y) {
    Tensor<T> gx(gy.shape);
    const std::size_t n = gy.size();
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < (long long)n; ++i)
        gx.data[std::size_t(i)] = y.data[std::size_t(i)] > T(0) ? gy.data[std::size_t(i)] : T(0);
    return gx;
}

template <typename T>
Tensor<T> leaky_relu(const Tensor<T>& x, T slope) {
    Tensor<T> y(x.shape);
    const std::size_t n = x.size();
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < (long long)n; ++i) {
        const T v = x.data[std::size_t(i)];
        y.data[std::size_t(i)] = v > T(0) ? v : slope * v;
    }
    return y;
}

template <typename T>
Tensor<T> leaky_relu_backward(const Tensor<T>& gy, const Tensor<T>& y, T slope) {
    Tensor<T> gx(gy.shape);
    const std::size_t n = gy.size();
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < (long long)n; ++i)
        gx.data[std::size_t(i)] = y.data[std::size_t(i)] > T(0) ? gy.data[std::size_t(i)]
                                                                : slope * gy.data[std::size_t(i)];
    return gx;
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
    Tensor<T> y(x.shape);
    for (std::size_t i = 0; i < x.size(); ++i) y.data[i] = T(1) / (T(1) + std::exp(-x.data[i]));
    return y;
}

template <typename T>
Tensor<T> nearest_upsample(const Tensor<T>& x, int factor) {
    const int rank = int(x.shape.size()) - 2;
    std::vector<int> out_shape = x.shape;
    for (int a = 0; a < rank; ++a) out_shape[std::size_t(a) + 2] *= factor;
    Tensor<T> y(out_shape);
    const int N = x.n(), C = x.channels();
    if (rank == 2) {
        const int ix = x.shape[2], iy = x.shape[3];
        const int ox = ix * factor, oy = iy * factor;
#pragma omp parallel for schedule(static) collapse(2)
        for (int s = 0; s < N; ++s)
            for (int c = 0; c < C; ++c) {
                const T* src = x.sample(s) + std::size_t(c) * std::size_t(ix) * std::size_t(iy);
                T* dst = y.sample(s) + std::size_t(c) * std::size_t(ox) * std::size_t(oy);
                for (int px = 0; px < ox; ++px) {
                    const T* srow = src + std::size_t(px / factor) * std::size_t(iy);
                    T* drow = dst + std::size_t(px) * std::size_t(oy);
                    for (int py = 0; py < oy; ++py) drow[py] = srow[py / factor];
                }
            }
    } else {
        const int ix = x.shape[2], iy = x.shape[3], iz = x.shape[4];
        const int ox = ix * factor, oy = iy * factor, oz = iz * factor;
#pragma omp parallel for schedule(static) collapse(2)
        for (int s = 0; s < N; ++s)
            for (int c = 0; c < C; ++c) {
                const T* src = x.sample(s) + std::size_t(c) * std::size_t(ix) * std::size_t(iy) * std::size_t(iz);
                T* dst = y.sample(s) + std::size_t(c) * std::size_t(ox) * std::size_t(oy) * std::size_t(oz);
                for (int px = 0; px < ox; ++px)
                    for (int py = 0; py < oy; ++py) {
                        const T* srow = src + (std::size_t(px / factor) * std::size_t(iy) +
                                               std::size_t(py / factor)) *
                                                  std::size_t(iz);
                        T* drow = dst + (std::size_t(px) * std::size_t(oy) + std::size_t(py)) * std::size_t(oz);
                        for (int pz = 0; pz < oz; ++pz) drow[pz] = srow[pz / factor];
                    }
            }
    }
    return y;
}

template <typename T>
Tensor<T> nearest_upsample_backward(const Tensor<T>& gy, int factor) {
    const int rank = int(gy.shape.size()) - 2;
    std::vector<int> in_shape = gy.shape;
    for (int a = 0; a < rank; ++a) in_shape[std::size_t(a) + 2] /= factor;
    Tensor<T> gx(in_shape);
    const int N = gy.n(), C = gy.channels();
    if (rank == 2) {
        const int ix = in_shape[2], iy = in_shape[3];
        const int ox = gy.shape[2], oy = gy.shape[3];
#pragma omp parallel for schedule(static) collapse(2)
        for (int s = 0; s < N; ++s)
            for (int c = 0; c < C; ++c) {
                const T* src = gy.sample(s) + std::size_t(c) * std::size_t(ox) * std::size_t(oy);
                T* dst = gx.sample(s) + std::size_t(c) * std::size_t(ix) * std::size_t(iy);
                for (int px = 0; px < ox; ++px) {
                    T* drow = dst + std::size_t(px / factor) * std::size_t(iy);
                    const T* srow = src + std::size_t(px) * std::size_t(oy);
                    for (int py = 0; py < oy; ++py) drow[py / factor] += srow[py];
                }
            }
    } else {
        const int ix = in_shape[2], iy = in_shape[3], iz = in_shape[4];
        const int ox = gy.shape[2], oy = gy.shape[3], oz = gy.shape[4];
#pragma omp parallel for schedule(static) collapse(2)
        for (int s = 0; s < N; ++s)
            for (int c = 0; c < C; ++c) {
                const T* src = gy.sample(s) + std::size_t(c) * std::size_t(ox) * std::size_t(oy) * std::size_t(oz);
                T* dst = gx.sample(s) + std::size_t(c) * std::size_t(ix) * std::size_t(iy) * std::size_t(iz);
                for (int px = 0; px < ox; ++px)
                    for (int py = 0; py < oy; ++py) {
                        T* drow = dst + (std::size_t(px / factor) * std::size_t(iy) +
                                         std::size_t(py / factor)) *
                                            std::size_t(iz);
                        const T* srow = src + (std::size_t(px) * std::size_t(oy) + std::size_t(py)) * std::size_t(oz);
                        for (int pz = 0; pz < oz; ++pz) drow[pz / factor] += srow[pz];
                    }
            }
    }
    return gx;
}

template <typename T>
Tensor<T> concat_channels(const std::vector<const Tensor<T>*>& parts) {
    if (parts.empty()) throw std::runtime_error("concat_channels: empty");
    int total_c = 0;
    for (const Tensor<T>* p : parts) total_c += p->channels();
    std::vector<int> shape = parts[0]->shape;
    shape[1] = total_c;
    Tensor<T> y(shape);
    const int N = y.n();
    const std::size_t plane = parts[0]->spatial();
    for (int s = 0; s < N; ++s) {
        T* dst = y.sample(s);
        for (const Tensor<T>* p : parts) {
            const std::size_t bytes = std::size_t(p->channels()) * plane;
            std::copy(p->sample(s), p->sample(s) + bytes, dst);
            dst += bytes;
        }
    }
    return y;
}

template <typename T>
void Adam<T>::step(const std::vector<ParamView<T>>& params, T lr) {
    if (m_.size() != params.size()) {
        m_.resize(params.size());
        v_.resize(params.size());
        for (std::size_t i = 0; i < params.size(); ++i) {
            m_[i].assign(params[i].value->size(), T(0));
            v_[i].assign(params[i].value->size(), T(0));
        }
    }
    ++t_;
    const T bc1 = T(1) - std::pow(beta1_, T(t_));
    const T bc2 = T(1) - std::pow(beta2_, T(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        std::vector<T>& value = *params[i].value;
        const std::vector<T>& grad = *params[i].grad;
        std::vector<T>& m = m_[i];
        std::vector<T>& v = v_[i];
        for (std::size_t j = 0; j < value.size(); ++j) {
            m[j] = beta1_ * m[j] + (T(1) - beta1_) * grad[j];
            v[j] = beta2_ * v[j] + (T(1) - beta2_) * grad[j] * grad[j];
            const T mhat = m[j] / bc1;
            const T vhat = v[j] / bc2;
            value[j] -= lr * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

template <typename T>
std::vector<StateView<T>> Adam<T>::state(const std::vector<ParamView<T>>& params) {
    if (m_.size() != params.size()) {
        m_.resize(params.size());
        v_.resize(params.size());
        for (std::size_t i = 0; i < params.size(); ++i) {
            m_[i].assign(params[i].value->size(), T(0));
            v_[i].assign(params[i].value->size(), T(0));
        }
    }
    std::vector<StateView<T>> out;
    for (std::size_t i = 0; i < params.size(); ++i) {
        out.push_back({params[i].name + ".adam_m", &m_[i]});
        out.push_back({params[i].name + ".adam_v", &v_[i]});
    }
    return out;
}

#define TG_INSTANTIATE(T)                                                                \
    template struct Conv<T>;                                                             \
    template struct BatchNorm<T>;                                                        \
    template struct Dense<T>;                                                            \
    template class Adam<T>;                                                              \
    template Tensor<T> relu<T>(const Tensor<T>&);                                        \
    template Tensor<T> relu_backward<T>(const Tensor<T>&, const Tensor<T>&);             \
    template Tensor<T> leaky_relu<T>(const Tensor<T>&, T);                               \
    template Tensor<T> leaky_relu_backward<T>(const Tensor<T>&, const Tensor<T>&, T);    \
    template Tensor<T> sigmoid<T>(const Tensor<T>&);                                     \
    template Tensor<T> nearest_upsample<T>(const Tensor<T>&, int);                       \
    template Tensor<T> nearest_upsample_backward<T>(const Tensor<T>&, int);              \
    template Tensor<T> concat_channels<T>(const std::vector<const Tensor<T>*>&);

TG_INSTANTIATE(float)
TG_INSTANTIATE(double)
#undef TG_INSTANTIATE

} // namespace tempogan
