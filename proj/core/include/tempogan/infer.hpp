#pragma once

#include "tempogan/batch.hpp"
#include "tempogan/field.hpp"
#include "tempogan/nets.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tempogan {

//! Low-res input bundle for the generator.
struct InferBundle {
    GridField rho;
    GridField vel;
};

//! Covering of the low-res domain by core tiles plus an overlap margin; the
//! output crops partition the high-res domain exactly once.
struct TilePlan {
    int core = 16;
    int overlap = 3;
    struct Tile {
        int lo[3] = {0, 0, 0}; // core start (low-res cells)
        int hi[3] = {0, 0, 0}; // core end (exclusive)
    };
    std::vector<Tile> tiles;
};

TilePlan make_tile_plan(const std::vector<int>& lo_shape, int core, int overlap);

//! Single full-size generator evaluation (inference mode, density clamped at
//! zero). Output shape = input * upsample factor.
GridField infer_full(Generator<float>& g, InputFields fields, const InferBundle& x);

//! Piecewise evaluation per the plan; with overlap >= the receptive-field
//! margin this matches infer_full up to float noise.
GridField infer_tiled(Generator<float>& g, InputFields fields, const InferBundle& x,
                      const TilePlan& plan);

struct VelocityControl {
    enum class Kind { scale, zero, replace } kind = Kind::scale;
    double scale = 1.0;
    GridField field; // for Kind::replace
};

//! Density untouched; velocity channels rewritten per the control knob.
InferBundle modify_velocity(const InferBundle& x, const VelocityControl& control);

struct RecursiveOptions {
    int times = 1;
    bool half_between_passes = false; // downsample by 2 between passes (net 2x per pass)
    std::size_t memory_budget_bytes = std::size_t(2) << 30;
    std::optional<TilePlan> plan; // required beyond the memory budget
};

//! Re-applies the generator to its own output; velocity for later passes is
//! the nearest-neighbor upsampled previous velocity.
GridField infer_recursive(Generator<float>& g, InputFields fields, const InferBundle& x,
                          const RecursiveOptions& opts);

struct TemporalMetrics {
    std::vector<double> advected; // mean |out_t - A(out_{t-1}, v_{t-1})|
    std::vector<double> raw;      // mean |out_t - out_{t-1}|
};

//! Frame-to-frame change of a generated sequence, both advection-compensated
//! and raw. Velocities are the low-res inputs, upsampled by `scale`.
TemporalMetrics temporal_metric(const std::vector<GridField>& outputs,
                                const std::vector<GridField>& vx, int scale);

double psnr(const GridField& test, const GridField& reference);

//! Mean gradient-magnitude of a density field (detail proxy).
double mean_gradient_magnitude(const GridField& rho);

} // namespace tempogan
