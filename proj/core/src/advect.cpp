#include "tempogan/advect.hpp"

#include <cmath>
#include <stdexcept>

namespace tempogan {

AdvectionCoeffs build_coeffs(const GridField& v, float dt) {
    const int d = v.dim();
    if (v.channels() != d) throw std::runtime_error("build_coeffs: velocity needs dim channels");

    AdvectionCoeffs c;
    c.dim_ = d;
    c.shape_ = v.shape();
    c.rows_.resize(v.cell_count());

    int stride[3] = {0, 0, 0};
    {
        int s = 1;
        for (int a = d - 1; a >= 0; --a) {
            stride[a] = s;
            s *= v.shape(a);
        }
    }

    const std::size_t cells = v.cell_count();
    const int corners = 1 << d;
#pragma omp parallel for schedule(static)
    for (long long ci = 0; ci < (long long)cells; ++ci) {
        std::size_t rem = std::size_t(ci);
        int pos[3] = {0, 0, 0};
        for (int a = 0; a < d; ++a) {
            pos[a] = int(rem / std::size_t(stride[a]));
            rem %= std::size_t(stride[a]);
        }
        const float* vel = v.data() + std::size_t(ci) * std::size_t(d);

        int i0[3];
        double w[3];
        for (int a = 0; a < d; ++a) {
            const int n = v.shape(a);
            double q = double(pos[a]) - double(dt) * double(vel[a]);
            if (q < 0.0) q = 0.0;
            if (q > double(n - 1)) q = double(n - 1);
            int i = int(std::floor(q));
            if (i > n - 2) i = n - 2;
            if (i < 0) i = 0;
            i0[a] = i;
            w[a] = q - double(i);
        }

        AdvectionCoeffs::Row& row = c.rows_[std::size_t(ci)];
        for (int k = 0; k < corners; ++k) {
            double wk = 1.0;
            std::size_t idx = 0;
            for (int a = 0; a < d; ++a) {
                const int bit = (k >> a) & 1;
                int ia = i0[a] + bit;
                if (ia > v.shape(a) - 1) ia = v.shape(a) - 1;
                idx += std::size_t(ia) * std::size_t(stride[a]);
                wk *= bit ? w[a] : (1.0 - w[a]);
            }
            row.index[size_t(k)] = uint32_t(idx);
            row.weight[size_t(k)] = float(wk);
        }
    }
    return c;
}

GridField advect_apply(const AdvectionCoeffs& c, const GridField& y) {
    if (y.shape() != c.shape()) throw std::runtime_error("advect_apply: shape mismatch");
    const int C = y.channels();
    GridField out(y.shape(), C);
    const int st = c.stencil();
    const std::size_t cells = c.cells();
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < (long long)cells; ++i) {
        const AdvectionCoeffs::Row& row = c.row(std::size_t(i));
        float* dst = out.data() + std::size_t(i) * std::size_t(C);
        for (int ch = 0; ch < C; ++ch) {
            float acc = 0.0f;
            for (int k = 0; k < st; ++k)
                acc += row.weight[size_t(k)] * y.data()[std::size_t(row.index[size_t(k)]) * std::size_t(C) + std::size_t(ch)];
            dst[ch] = acc;
        }
    }
    return out;
}

GridField advect_apply_transpose(const AdvectionCoeffs& c, const GridField& g) {
    if (g.shape() != c.shape()) throw std::runtime_error("advect_apply_transpose: shape mismatch");
    const int C = g.channels();
    GridField out(g.shape(), C, 0.0f);
    const int st = c.stencil();
    const std::size_t cells = c.cells();
    // Scatter kept sequential: rows overlap, and a fixed accumulation order
    // keeps results identical across thread counts.
    for (std::size_t i = 0; i < cells; ++i) {
        const AdvectionCoeffs::Row& row = c.row(i);
        const float* src = g.data() + i * std::size_t(C);
        for (int k = 0; k < st; ++k) {
            float* dst = out.data() + std::size_t(row.index[size_t(k)]) * std::size_t(C);
            const float w = row.weight[size_t(k)];
            for (int ch = 0; ch < C; ++ch) dst[ch] += w * src[ch];
        }
    }
    return out;
}

std::array<GridField, 3> align_triplet(const GridField& f_prev, const GridField& f_mid,
                                       const GridField& f_next, const GridField& v_prev,
                                       const GridField& v_next) {
    if (!f_prev.same_layout(f_mid) || !f_mid.same_layout(f_next))
        throw std::runtime_error("align_triplet: frame layout mismatch");
    if (v_prev.shape() != f_mid.shape() || v_next.shape() != f_mid.shape())
        throw std::runtime_error("align_triplet: velocity resolution mismatch");

    AdvectionCoeffs fwd = build_coeffs(v_prev, 1.0f);
    AdvectionCoeffs bwd = build_coeffs(v_next, -1.0f);
    return {advect_apply(fwd, f_prev), f_mid, advect_apply(bwd, f_next)};
}

} // namespace tempogan
