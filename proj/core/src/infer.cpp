#include "tempogan/infer.hpp"

#include "tempogan/advect.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace tempogan {

namespace {

// (1, C, spatial...) tensor from the bundle with clamp-to-edge window reads
Tensor<float> bundle_tensor(const InferBundle& x, InputFields fields, const int* lo, const int* hi) {
    const int d = x.rho.dim();
    GridField vort;
    const bool want_v = fields != InputFields::density;
    const bool want_w = fields == InputFields::density_velocity_vorticity;
    if (want_w) vort = curl(x.vel);

    std::vector<int> shape = {1, input_channel_count(fields, d)};
    for (int a = 0; a < d; ++a) shape.push_back(hi[a] - lo[a]);
    Tensor<float> t(shape);
    const std::size_t plane = t.spatial();

    auto clampi = [](int v, int n) { return v < 0 ? 0 : (v >= n ? n - 1 : v); };
    std::size_t i = 0;
    int pos[3] = {lo[0], lo[1], d > 2 ? lo[2] : 0};
    for (; i < plane; ++i) {
        int cp[3];
        for (int a = 0; a < d; ++a) cp[a] = clampi(pos[a], x.rho.shape(a));
        const std::size_t cell = x.rho.cell_index(cp);
        float* base = t.data.data();
        base[i] = x.rho.values()[cell];
        if (want_v)
            for (int a = 0; a < d; ++a)
                base[(1 + std::size_t(a)) * plane + i] = x.vel.values()[cell * std::size_t(d) + std::size_t(a)];
        if (want_w) {
            const int wc = vort.channels();
            for (int c = 0; c < wc; ++c)
                base[(1 + std::size_t(d) + std::size_t(c)) * plane + i] =
                    vort.values()[cell * std::size_t(wc) + std::size_t(c)];
        }
        for (int a = d - 1; a >= 0; --a) {
            if (++pos[a] < hi[a]) break;
            pos[a] = lo[a];
        }
    }
    return t;
}

GridField tensor_to_field(const Tensor<float>& t, int dim) {
    std::vector<int> shape(t.shape.begin() + 2, t.shape.end());
    (void)dim;
    GridField f(shape, 1);
    for (std::size_t i = 0; i < f.size(); ++i) f.values()[i] = std::max(0.0f, t.data[i]);
    return f;
}

} // namespace

TilePlan make_tile_plan(const std::vector<int>& lo_shape, int core, int overlap) {
    if (core < 1 || overlap < 0) throw std::runtime_error("make_tile_plan: bad parameters");
    TilePlan plan;
    plan.core = core;
    plan.overlap = overlap;
    const int d = int(lo_shape.size());
    std::vector<int> counts(size_t(d));
    for (int a = 0; a < d; ++a) counts[size_t(a)] = (lo_shape[size_t(a)] + core - 1) / core;
    std::vector<int> idx(size_t(d), 0);
    while (true) {
        TilePlan::Tile t;
        for (int a = 0; a < d; ++a) {
            t.lo[a] = idx[size_t(a)] * core;
            t.hi[a] = std::min(lo_shape[size_t(a)], t.lo[a] + core);
        }
        plan.tiles.push_back(t);
        int a = d - 1;
        for (; a >= 0; --a) {
            if (++idx[size_t(a)] < counts[size_t(a)]) break;
            idx[size_t(a)] = 0;
        }
        if (a < 0) break;
    }
    return plan;
}

GridField infer_full(Generator<float>& g, InputFields fields, const InferBundle& x) {
    const int d = x.rho.dim();
    int lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
    for (int a = 0; a < d; ++a) hi[a] = x.rho.shape(a);
    Tensor<float> in = bundle_tensor(x, fields, lo, hi);
    Generator<float>::Pass pass;
    Tensor<float> out = g.forward(in, pass, NetMode::eval, false);
    return tensor_to_field(out, d);
}

GridField infer_tiled(Generator<float>& g, InputFields fields, const InferBundle& x,
                      const TilePlan& plan) {
    const int d = x.rho.dim();
    const int factor = g.config().upsample;
    std::vector<int> out_shape(size_t(d));
    for (int a = 0; a < d; ++a) out_shape[size_t(a)] = x.rho.shape(a) * factor;
    GridField out(out_shape, 1);

    for (const TilePlan::Tile& t : plan.tiles) {
        for (int a = 0; a < d; ++a)
            if (t.hi[a] <= t.lo[a] || t.hi[a] > x.rho.shape(a))
                throw std::runtime_error("infer_tiled: plan does not match the domain");
        int lo[3], hi[3];
        for (int a = 0; a < d; ++a) {
            lo[a] = t.lo[a] - plan.overlap;
            hi[a] = t.hi[a] + plan.overlap;
        }
        Tensor<float> in = bundle_tensor(x, fields, lo, hi);
        Generator<float>::Pass pass;
        Tensor<float> tile_out = g.forward(in, pass, NetMode::eval, false);

        // crop the core region and paste
        const int oy = tile_out.shape[d == 2 ? 3 : 4];
        (void)oy;
        std::vector<int> tile_shape(tile_out.shape.begin() + 2, tile_out.shape.end());
        int pos[3] = {0, 0, 0};
        std::vector<int> core_extent(size_t(d));
        for (int a = 0; a < d; ++a) core_extent[size_t(a)] = (t.hi[a] - t.lo[a]) * factor;
        std::size_t total = 1;
        for (int a = 0; a < d; ++a) total *= std::size_t(core_extent[size_t(a)]);
        for (std::size_t i = 0; i < total; ++i) {
            int src[3], dst[3];
            for (int a = 0; a < d; ++a) {
                src[a] = pos[a] + plan.overlap * factor;
                dst[a] = t.lo[a] * factor + pos[a];
            }
            std::size_t si = 0, di = 0;
            for (int a = 0; a < d; ++a) {
                si = si * std::size_t(tile_shape[size_t(a)]) + std::size_t(src[a]);
                di = di * std::size_t(out.shape(a)) + std::size_t(dst[a]);
            }
            out.values()[di] = std::max(0.0f, tile_out.data[si]);
            for (int a = d - 1; a >= 0; --a) {
                if (++pos[a] < core_extent[size_t(a)]) break;
                pos[a] = 0;
            }
        }
    }
    return out;
}

InferBundle modify_velocity(const InferBundle& x, const VelocityControl& control) {
    InferBundle out{x.rho, x.vel};
    switch (control.kind) {
    case VelocityControl::Kind::scale:
        for (float& v : out.vel.values()) v = float(v * control.scale);
        break;
    case VelocityControl::Kind::zero:
        for (float& v : out.vel.values()) v = 0.0f;
        break;
    case VelocityControl::Kind::replace:
        if (!control.field.same_layout(x.vel))
            throw std::runtime_error("modify_velocity: replacement field layout mismatch");
        out.vel = control.field;
        break;
    }
    return out;
}

GridField infer_recursive(Generator<float>& g, InputFields fields, const InferBundle& x,
                          const RecursiveOptions& opts) {
    if (opts.times < 1) throw std::runtime_error("infer_recursive: times must be >= 1");
    InferBundle cur{x.rho, x.vel};
    GridField out;
    const int factor = g.config().upsample;
    int max_channels = 0;
    for (const auto& b : g.config().blocks) max_channels = std::max(max_channels, b[1]);

    for (int pass = 0; pass < opts.times; ++pass) {
        std::size_t out_cells = 1;
        for (int a = 0; a < cur.rho.dim(); ++a) out_cells *= std::size_t(cur.rho.shape(a) * factor);
        const std::size_t need = out_cells * std::size_t(max_channels) * sizeof(float) * 3;
        if (need > opts.memory_budget_bytes && !opts.plan) {
            const int hint = std::max(8, int(cur.rho.shape(0) / 4));
            char buf[160];
            std::snprintf(buf, sizeof buf,
                          "infer_recursive: pass %d exceeds the memory budget; supply a tile plan "
                          "(e.g. core %d, overlap 4)",
                          pass + 1, hint);
            throw std::runtime_error(buf);
        }
        out = opts.plan ? infer_tiled(g, fields, cur, *opts.plan) : infer_full(g, fields, cur);
        if (pass + 1 < opts.times) {
            GridField vel = upsample_nn(cur.vel, factor, ResampleKind::velocity);
            if (opts.half_between_passes) {
                out = downsample(out, 2, ResampleKind::passive);
                vel = downsample(vel, 2, ResampleKind::velocity);
            }
            cur = InferBundle{std::move(out), std::move(vel)};
        }
    }
    return out;
}

TemporalMetrics temporal_metric(const std::vector<GridField>& outputs,
                                const std::vector<GridField>& vx, int scale) {
    if (outputs.size() < 2) throw std::runtime_error("temporal_metric: need at least 2 frames");
    if (vx.size() != outputs.size())
        throw std::runtime_error("temporal_metric: need one velocity field per frame");
    TemporalMetrics m;
    for (std::size_t t = 1; t < outputs.size(); ++t) {
        GridField v_hi = scale > 1 ? upsample_nn(vx[t - 1], scale, ResampleKind::velocity) : vx[t - 1];
        GridField adv = advect_apply(build_coeffs(v_hi, 1.0f), outputs[t - 1]);
        double acc_adv = 0.0, acc_raw = 0.0;
        for (std::size_t i = 0; i < outputs[t].size(); ++i) {
            acc_adv += std::abs(double(outputs[t].values()[i]) - double(adv.values()[i]));
            acc_raw += std::abs(double(outputs[t].values()[i]) - double(outputs[t - 1].values()[i]));
        }
        m.advected.push_back(acc_adv / double(outputs[t].size()));
        m.raw.push_back(acc_raw / double(outputs[t].size()));
    }
    return m;
}

double psnr(const GridField& test, const GridField& reference) {
    if (!test.same_layout(reference)) throw std::runtime_error("psnr: layout mismatch");
    double peak = 0.0, mse = 0.0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        peak = std::max(peak, double(reference.values()[i]));
        const double d = double(test.values()[i]) - double(reference.values()[i]);
        mse += d * d;
    }
    mse /= double(test.size());
    if (peak <= 0.0) peak = 1.0;
    if (mse <= 0.0) return 99.0;
    return 10.0 * std::log10(peak * peak / mse);
}

double mean_gradient_magnitude(const GridField& rho) {
    const int d = rho.dim();
    double acc = 0.0;
    const std::size_t cells = rho.cell_count();
    std::vector<int> stride(size_t(d));
    {
        int s = 1;
        for (int a = d - 1; a >= 0; --a) {
            stride[size_t(a)] = s;
            s *= rho.shape(a);
        }
    }
    for (std::size_t i = 0; i < cells; ++i) {
        double mag2 = 0.0;
        std::size_t rem = i;
        for (int a = 0; a < d; ++a) {
            const int x = int(rem / std::size_t(stride[size_t(a)]));
            rem %= std::size_t(stride[size_t(a)]);
            const int n = rho.shape(a);
            double diff;
            if (n < 2) diff = 0.0;
            else if (x == 0)
                diff = double(rho.values()[i + std::size_t(stride[size_t(a)])]) - double(rho.values()[i]);
            else if (x == n - 1)
                diff = double(rho.values()[i]) - double(rho.values()[i - std::size_t(stride[size_t(a)])]);
            else
                diff = 0.5 * (double(rho.values()[i + std::size_t(stride[size_t(a)])]) -
                              double(rho.values()[i - std::size_t(stride[size_t(a)])]));
            mag2 += diff * diff;
        }
        acc += std::sqrt(mag2);
    }
    return acc / double(cells);
}

} // namespace tempogan
