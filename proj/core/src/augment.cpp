#include "tempogan/augment.hpp"

#include <cmath>
#include <stdexcept>

namespace tempogan {

namespace {

// Cell-center correspondence between the base grid and a res_factor-times
// finer grid: x_r = r*x + (r-1)/2.
inline double to_res(double x, int r) { return double(r) * x + 0.5 * double(r - 1); }

} // namespace

void AugmentationTransform::map_position(const double* p, int res_factor, double* q) const {
    double ct[3], cs[3];
    for (int a = 0; a < dim; ++a) {
        ct[a] = to_res(tile_center[a], res_factor);
        cs[a] = to_res(source_center[a], res_factor);
    }
    for (int a = 0; a < dim; ++a) {
        double acc = cs[a];
        for (int b = 0; b < dim; ++b) acc += linear_inv[a][b] * (p[b] - ct[b]);
        q[a] = acc;
    }
}

std::vector<std::array<double, 3>> AugmentationTransform::mapped_corners(int res_factor) const {
    std::vector<std::array<double, 3>> out;
    const int corners = 1 << dim;
    for (int k = 0; k < corners; ++k) {
        double p[3] = {0, 0, 0};
        for (int a = 0; a < dim; ++a)
            p[a] = ((k >> a) & 1) ? double(tile_shape[size_t(a)] * res_factor - 1) : 0.0;
        std::array<double, 3> q = {0, 0, 0};
        map_position(p, res_factor, q.data());
        out.push_back(q);
    }
    return out;
}

bool transform_in_bounds(const AugmentationTransform& t, const std::vector<int>& source_shape,
                         int res_factor, double tol) {
    for (const auto& q : t.mapped_corners(res_factor))
        for (int a = 0; a < t.dim; ++a)
            if (q[size_t(a)] < -tol || q[size_t(a)] > double(source_shape[size_t(a)] * res_factor - 1) + tol)
                return false;
    return true;
}

namespace {

struct Interval {
    double lo, hi;
};

// Feasible source-center interval per axis so that all mapped tile corners at
// resolution r stay within [0, r*S-1], expressed in base-grid units.
Interval feasible_center(const AugmentationTransform& t, int axis, int source_n, int r) {
    double extent = 0.0;
    for (int b = 0; b < t.dim; ++b)
        extent += std::abs(t.linear_inv[axis][b]) * 0.5 * double(t.tile_shape[size_t(b)] * r - 1);
    const double lo_r = extent;                            // center >= extent
    const double hi_r = double(source_n * r - 1) - extent; // center <= max - extent
    // convert from resolution-r coordinates back to base units
    return {(lo_r - 0.5 * double(r - 1)) / double(r), (hi_r - 0.5 * double(r - 1)) / double(r)};
}

void build_linear(AugmentationTransform& t, double scale, double theta_deg,
                  const std::array<bool, 3>& flip) {
    t.scale = scale;
    t.theta_deg = theta_deg;
    t.flip = flip;
    const double th = theta_deg * M_PI / 180.0;
    const double c = std::cos(th), s = std::sin(th);
    double R[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    if (t.dim == 2) {
        // counter-clockwise rotation in the xy-plane
        R[0][0] = c; R[0][1] = -s;
        R[1][0] = s; R[1][1] = c;
    } else {
        // rotation about the vertical axis keeps buoyancy physics intact
        R[0][0] = c; R[0][2] = -s;
        R[2][0] = s; R[2][2] = c;
    }
    // value matrix s*R*F; positions use the exact inverse (1/s)*F*R^T
    for (int a = 0; a < t.dim; ++a)
        for (int b = 0; b < t.dim; ++b) {
            t.linear[a][b] = scale * R[a][b] * (flip[size_t(b)] ? -1.0 : 1.0);
            t.linear_inv[a][b] = (flip[size_t(a)] ? -1.0 : 1.0) * R[b][a] / scale;
        }
}

} // namespace

AugmentationTransform make_transform(const std::vector<int>& tile_shape,
                                     const std::vector<int>& source_shape, double scale,
                                     double theta_deg, const std::array<bool, 3>& flip,
                                     int hi_scale, const double* want_center) {
    if (tile_shape.size() != source_shape.size())
        throw std::runtime_error("make_transform: dim mismatch");
    AugmentationTransform t;
    t.dim = int(tile_shape.size());
    for (int a = 0; a < t.dim; ++a) {
        t.tile_shape[size_t(a)] = tile_shape[size_t(a)];
        t.tile_center[a] = 0.5 * double(tile_shape[size_t(a)] - 1);
    }
    build_linear(t, scale, theta_deg, flip);

    for (int a = 0; a < t.dim; ++a) {
        Interval iv = feasible_center(t, a, source_shape[size_t(a)], 1);
        if (hi_scale > 1) {
            Interval hi = feasible_center(t, a, source_shape[size_t(a)], hi_scale);
            iv.lo = std::max(iv.lo, hi.lo);
            iv.hi = std::min(iv.hi, hi.hi);
        }
        if (iv.lo > iv.hi + 1e-9)
            throw std::runtime_error("tile exceeds source under transform");
        double want = want_center ? want_center[a] : 0.5 * double(source_shape[size_t(a)] - 1);
        t.source_center[a] = std::min(std::max(want, iv.lo), std::max(iv.lo, iv.hi));
    }
    return t;
}

AugmentationTransform sample_transform(Rng& rng, const std::vector<int>& tile_shape,
                                       const std::vector<int>& source_shape, int hi_scale) {
    if (tile_shape.size() != source_shape.size())
        throw std::runtime_error("sample_transform: dim mismatch");
    AugmentationTransform t;
    t.dim = int(tile_shape.size());
    for (int a = 0; a < t.dim; ++a) {
        t.tile_shape[size_t(a)] = tile_shape[size_t(a)];
        t.tile_center[a] = 0.5 * double(tile_shape[size_t(a)] - 1);
    }
    const double scale = rng.uniform(0.85, 1.15);
    const double theta = rng.uniform(-90.0, 90.0);
    std::array<bool, 3> flip = {false, false, false};
    for (int a = 0; a < t.dim; ++a) flip[size_t(a)] = rng.coin();
    build_linear(t, scale, theta, flip);

    for (int a = 0; a < t.dim; ++a) {
        Interval iv = feasible_center(t, a, source_shape[size_t(a)], 1);
        if (hi_scale > 1) {
            Interval hi = feasible_center(t, a, source_shape[size_t(a)], hi_scale);
            iv.lo = std::max(iv.lo, hi.lo);
            iv.hi = std::min(iv.hi, hi.hi);
        }
        if (iv.lo > iv.hi + 1e-9)
            throw std::runtime_error("tile exceeds source under transform");
        t.source_center[a] = iv.lo >= iv.hi ? iv.lo : rng.uniform(iv.lo, iv.hi);
    }
    return t;
}

GridField apply_passive(const GridField& f, const AugmentationTransform& t, int res_factor) {
    if (f.dim() != t.dim) throw std::runtime_error("apply_passive: dim mismatch");
    std::vector<int> out_shape(size_t(t.dim));
    for (int a = 0; a < t.dim; ++a) out_shape[size_t(a)] = t.tile_shape[size_t(a)] * res_factor;
    GridField out(out_shape, f.channels());

    const std::size_t cells = out.cell_count();
    const int C = f.channels();
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < (long long)cells; ++i) {
        int pos[3] = {0, 0, 0};
        std::size_t rem = std::size_t(i);
        for (int a = t.dim - 1; a >= 0; --a) {
            pos[a] = int(rem % std::size_t(out_shape[size_t(a)]));
            rem /= std::size_t(out_shape[size_t(a)]);
        }
        double p[3] = {double(pos[0]), double(pos[1]), double(pos[2])};
        double q[3];
        t.map_position(p, res_factor, q);
        sample_linear(f, q, out.data() + std::size_t(i) * std::size_t(C));
    }
    return out;
}

GridField apply_directional(const GridField& v, const AugmentationTransform& t, int res_factor) {
    if (v.channels() != v.dim()) throw std::runtime_error("apply_directional: velocity needs dim channels");
    GridField out = apply_passive(v, t, res_factor);
    const int d = t.dim;
    const std::size_t cells = out.cell_count();
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < (long long)cells; ++i) {
        float* val = out.data() + std::size_t(i) * std::size_t(d);
        double src[3];
        for (int a = 0; a < d; ++a) src[a] = val[a];
        for (int a = 0; a < d; ++a) {
            double acc = 0.0;
            for (int b = 0; b < d; ++b) acc += t.linear[a][b] * src[b];
            val[a] = float(acc);
        }
    }
    return out;
}

GridField recompute_derived(const GridField& augmented_velocity) {
    return curl(augmented_velocity);
}

} // namespace tempogan
