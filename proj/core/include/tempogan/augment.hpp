#pragma once

#include "tempogan/field.hpp"
#include "tempogan/rng.hpp"

#include <array>
#include <vector>

namespace tempogan {

//! How a channel bundle behaves under a spatial transform.
enum class FieldKind {
    passive,     // resample only (density)
    directional, // resample and rotate values (velocity)
    derived      // invalid after transform; recompute from other fields (vorticity)
};

//! Affine tile transform: uniform scale * rotation * reflection plus a
//! translation chosen so the mapped tile stays inside the source domain.
//!
//! `linear` (s * R * F) is the matrix applied to directional values. Sampling
//! positions pull back through its inverse, so positions and vectors describe
//! the same change of frame and an advected sequence stays advected after
//! augmentation.
//!
//! The transform is parameterized at the low-res "base" grid. The same
//! physical transform applies to the paired high-res field through
//! map_position(res_factor): cell centers correspond via
//! x_hi = r*x_lo + (r-1)/2, which keeps low/high tiles of one training
//! sample spatially registered.
class AugmentationTransform {
public:
    int dim = 2;
    double linear[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};     // s * R * F, applied to values
    double linear_inv[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}; // pull-back for positions
    double tile_center[3] = {0, 0, 0};                           // (tile-1)/2 at base res
    double source_center[3] = {0, 0, 0};                         // chosen translation target
    std::array<int, 3> tile_shape = {0, 0, 0};                   // base-res tile
    // metadata
    double scale = 1.0;
    double theta_deg = 0.0;
    std::array<bool, 3> flip = {false, false, false};

    //! Map a tile position (at base resolution * res_factor) to source
    //! coordinates at the same resolution.
    void map_position(const double* p, int res_factor, double* q) const;

    //! Mapped tile-corner positions at a given resolution.
    std::vector<std::array<double, 3>> mapped_corners(int res_factor) const;
};

//! True if every mapped tile corner lies in [0, source*res_factor - 1] per
//! axis, i.e. sampling never reads outside the domain.
bool transform_in_bounds(const AugmentationTransform& t, const std::vector<int>& source_shape,
                         int res_factor, double tol = 1e-9);

//! Deterministic construction: given scale/rotation/flips, picks the feasible
//! translation closest to `want_center` (tile center of the source when
//! omitted). Throws "tile exceeds source under transform" when no valid
//! translation exists at either resolution.
AugmentationTransform make_transform(const std::vector<int>& tile_shape,
                                     const std::vector<int>& source_shape, double scale,
                                     double theta_deg, const std::array<bool, 3>& flip,
                                     int hi_scale = 1, const double* want_center = nullptr);

//! Random transform with scale in [0.85, 1.15], rotation in [-90, 90] degrees
//! and per-axis reflections; translation sampled uniformly over the feasible
//! region for both the base tile and the hi_scale-times-larger tile.
AugmentationTransform sample_transform(Rng& rng, const std::vector<int>& tile_shape,
                                       const std::vector<int>& source_shape, int hi_scale = 1);

//! out(p) = f(A p) for every tile cell.
GridField apply_passive(const GridField& f, const AugmentationTransform& t, int res_factor);

//! out(p) = L f(A p): velocity values rotate/flip/scale with the transform.
GridField apply_directional(const GridField& v, const AugmentationTransform& t, int res_factor);

//! Derived fields are recomputed, never resampled: vorticity of the already
//! augmented velocity tile.
GridField recompute_derived(const GridField& augmented_velocity);

} // namespace tempogan
