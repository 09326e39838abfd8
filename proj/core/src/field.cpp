#include "tempogan/field.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace tempogan {

GridField::GridField(std::vector<int> shape, int channels, float fill)
    : shape_(std::move(shape)), channels_(channels) {
    if (shape_.size() < 2 || shape_.size() > 3)
        throw std::runtime_error("GridField: dim must be 2 or 3");
    if (channels_ < 1) throw std::runtime_error("GridField: channels must be >= 1");
    std::size_t n = 1;
    for (int s : shape_) {
        if (s < 1) throw std::runtime_error("GridField: shape entries must be >= 1");
        n *= std::size_t(s);
    }
    data_.assign(n * std::size_t(channels_), fill);
}

std::size_t GridField::cell_count() const {
    std::size_t n = 1;
    for (int s : shape_) n *= std::size_t(s);
    return n;
}

std::size_t GridField::cell_index(const int* pos) const {
    std::size_t idx = std::size_t(pos[0]);
    for (int a = 1; a < dim(); ++a) idx = idx * std::size_t(shape_[size_t(a)]) + std::size_t(pos[a]);
    return idx;
}

float& GridField::at2(int x, int y, int c) {
    return data_[(std::size_t(x) * shape_[1] + std::size_t(y)) * channels_ + c];
}
float GridField::at2(int x, int y, int c) const {
    return data_[(std::size_t(x) * shape_[1] + std::size_t(y)) * channels_ + c];
}
float& GridField::at3(int x, int y, int z, int c) {
    return data_[((std::size_t(x) * shape_[1] + std::size_t(y)) * shape_[2] + std::size_t(z)) * channels_ + c];
}
float GridField::at3(int x, int y, int z, int c) const {
    return data_[((std::size_t(x) * shape_[1] + std::size_t(y)) * shape_[2] + std::size_t(z)) * channels_ + c];
}

bool GridField::all_finite() const {
    for (float v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

void sample_linear(const GridField& f, const double* pos, float* out) {
    const int d = f.dim();
    const int C = f.channels();
    int i0[3];
    double w[3];
    for (int a = 0; a < d; ++a) {
        const int n = f.shape(a);
        double q = pos[a];
        if (q < 0.0) q = 0.0;
        if (q > double(n - 1)) q = double(n - 1);
        double fl = std::floor(q);
        int i = int(fl);
        if (i > n - 2) i = n - 2; // keeps i+1 valid; w becomes 1 at the top edge
        if (i < 0) i = 0;         // n == 1 axis
        i0[a] = i;
        w[a] = q - double(i);
    }
    for (int c = 0; c < C; ++c) out[c] = 0.0f;

    const int corners = 1 << d;
    int pos_i[3];
    for (int k = 0; k < corners; ++k) {
        double wk = 1.0;
        for (int a = 0; a < d; ++a) {
            const int bit = (k >> a) & 1;
            const int n = f.shape(a);
            int ia = i0[a] + bit;
            if (ia > n - 1) ia = n - 1;
            pos_i[a] = ia;
            wk *= bit ? w[a] : (1.0 - w[a]);
        }
        if (wk == 0.0) continue;
        const float* src = f.data() + f.cell_index(pos_i) * C;
        for (int c = 0; c < C; ++c) out[c] += float(wk * src[c]);
    }
}

float sample_linear_scalar(const GridField& f, const double* pos) {
    float v;
    sample_linear(f, pos, &v);
    return v;
}

namespace {

// Central difference along `axis`, one-sided at the boundary.
inline double diff1(const GridField& f, const int* pos, int c, int axis) {
    const int n = f.shape(axis);
    int lo[3] = {pos[0], pos[1], f.dim() > 2 ? pos[2] : 0};
    int hi[3] = {pos[0], pos[1], f.dim() > 2 ? pos[2] : 0};
    double scale = 0.5;
    if (pos[axis] == 0) {
        hi[axis] = pos[axis] + 1;
        scale = 1.0;
    } else if (pos[axis] == n - 1) {
        lo[axis] = pos[axis] - 1;
        scale = 1.0;
    } else {
        lo[axis] = pos[axis] - 1;
        hi[axis] = pos[axis] + 1;
    }
    return (double(f.at(hi, c)) - double(f.at(lo, c))) * scale;
}

} // namespace

GridField curl(const GridField& v) {
    const int d = v.dim();
    if (v.channels() != d) throw std::runtime_error("curl: field must have dim channels");
    for (int a = 0; a < d; ++a)
        if (v.shape(a) < 3) throw std::runtime_error("curl: degenerate grid");

    GridField w(v.shape(), d == 2 ? 1 : 3);
    if (d == 2) {
        const int nx = v.shape(0), ny = v.shape(1);
        for (int x = 0; x < nx; ++x)
            for (int y = 0; y < ny; ++y) {
                int p[2] = {x, y};
                // dv_y/dx - dv_x/dy
                w.at2(x, y, 0) = float(diff1(v, p, 1, 0) - diff1(v, p, 0, 1));
            }
    } else {
        const int nx = v.shape(0), ny = v.shape(1), nz = v.shape(2);
        for (int x = 0; x < nx; ++x)
            for (int y = 0; y < ny; ++y)
                for (int z = 0; z < nz; ++z) {
                    int p[3] = {x, y, z};
                    const double dzy = diff1(v, p, 2, 1); // dv_z/dy
                    const double dyz = diff1(v, p, 1, 2); // dv_y/dz
                    const double dxz = diff1(v, p, 0, 2); // dv_x/dz
                    const double dzx = diff1(v, p, 2, 0); // dv_z/dx
                    const double dyx = diff1(v, p, 1, 0); // dv_y/dx
                    const double dxy = diff1(v, p, 0, 1); // dv_x/dy
                    w.at3(x, y, z, 0) = float(dzy - dyz);
                    w.at3(x, y, z, 1) = float(dxz - dzx);
                    w.at3(x, y, z, 2) = float(dyx - dxy);
                }
    }
    return w;
}

GridField divergence(const GridField& v) {
    const int d = v.dim();
    if (v.channels() != d) throw std::runtime_error("divergence: field must have dim channels");
    GridField div(v.shape(), 1);

    // Negative adjoint of the mirrored central-difference gradient. At walls
    // this reduces to the closed-box flux balance (u[0]+u[1])/2 against a
    // zero-flux wall, which is exactly what the pressure projection drives
    // to zero.
    const std::size_t cells = v.cell_count();
    std::vector<int> stride(size_t(d));
    {
        int s = 1;
        for (int a = d - 1; a >= 0; --a) {
            stride[size_t(a)] = s;
            s *= v.shape(a);
        }
    }
    int pos[3] = {0, 0, 0};
    for (std::size_t i = 0; i < cells; ++i) {
        double acc = 0.0;
        for (int a = 0; a < d; ++a) {
            const int n = v.shape(a);
            const std::size_t base = i * std::size_t(d);
            const std::size_t st = std::size_t(stride[size_t(a)]) * std::size_t(d);
            if (pos[a] == 0)
                acc += 0.5 * (double(v.data()[base + a]) + double(v.data()[base + st + a]));
            else if (pos[a] == n - 1)
                acc -= 0.5 * (double(v.data()[base + a]) + double(v.data()[base - st + a]));
            else
                acc += 0.5 * (double(v.data()[base + st + a]) - double(v.data()[base - st + a]));
        }
        div.values()[i] = float(acc);
        for (int a = d - 1; a >= 0; --a) {
            if (++pos[a] < v.shape(a)) break;
            pos[a] = 0;
        }
    }
    return div;
}

float max_abs_divergence(const GridField& v) {
    GridField div = divergence(v);
    float m = 0.0f;
    for (float x : div.values()) m = std::max(m, std::abs(x));
    return m;
}

GridField downsample(const GridField& f, int factor, ResampleKind kind) {
    if (factor < 1) throw std::runtime_error("downsample: factor must be >= 1");
    const int d = f.dim();
    std::vector<int> out_shape(size_t(d));
    for (int a = 0; a < d; ++a) {
        if (f.shape(a) % factor != 0)
            throw std::runtime_error("downsample: shape not divisible by factor");
        out_shape[size_t(a)] = f.shape(a) / factor;
    }
    const int C = f.channels();
    GridField out(out_shape, C);

    const double norm = 1.0 / std::pow(double(factor), d) / (kind == ResampleKind::velocity ? factor : 1.0);
    const std::size_t blocks = out.cell_count();
    const int block_cells = int(std::pow(double(factor), d));
    std::vector<double> acc(size_t(C));

    int opos[3] = {0, 0, 0};
    for (std::size_t b = 0; b < blocks; ++b) {
        for (int c = 0; c < C; ++c) acc[size_t(c)] = 0.0;
        for (int k = 0; k < block_cells; ++k) {
            int rem = k, ipos[3];
            for (int a = d - 1; a >= 0; --a) {
                ipos[a] = opos[a] * factor + rem % factor;
                rem /= factor;
            }
            const float* src = f.data() + f.cell_index(ipos) * C;
            for (int c = 0; c < C; ++c) acc[size_t(c)] += src[c];
        }
        float* dst = out.data() + b * std::size_t(C);
        for (int c = 0; c < C; ++c) dst[c] = float(acc[size_t(c)] * norm);
        for (int a = d - 1; a >= 0; --a) {
            if (++opos[a] < out.shape(a)) break;
            opos[a] = 0;
        }
    }
    return out;
}

GridField upsample_nn(const GridField& f, int factor, ResampleKind kind) {
    if (factor < 1) throw std::runtime_error("upsample_nn: factor must be >= 1");
    const int d = f.dim();
    const int C = f.channels();
    std::vector<int> out_shape(size_t(d));
    for (int a = 0; a < d; ++a) out_shape[size_t(a)] = f.shape(a) * factor;
    GridField out(out_shape, C);

    const float gain = kind == ResampleKind::velocity ? float(factor) : 1.0f;
    const std::size_t cells = out.cell_count();
    int opos[3] = {0, 0, 0};
    for (std::size_t i = 0; i < cells; ++i) {
        int ipos[3];
        for (int a = 0; a < d; ++a) ipos[a] = opos[a] / factor;
        const float* src = f.data() + f.cell_index(ipos) * C;
        float* dst = out.data() + i * std::size_t(C);
        for (int c = 0; c < C; ++c) dst[c] = src[c] * gain;
        for (int a = d - 1; a >= 0; --a) {
            if (++opos[a] < out.shape(a)) break;
            opos[a] = 0;
        }
    }
    return out;
}

} // namespace tempogan
