#pragma once

#include "tempogan/field.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace tempogan {

//! Linearized semi-Lagrangian advection.
//!
//! For a fixed velocity field the advection step is a sparse linear operator
//! M: each target cell gathers the multilinear stencil at its backtraced
//! source position. Applying M is the advection itself; applying M^T is the
//! derivative needed when gradients flow through the step during training.
class AdvectionCoeffs {
public:
    //! One row per target cell: 2^d in-domain source indices plus weights
    //! that are each in [0,1] and sum to 1.
    struct Row {
        std::array<uint32_t, 8> index;
        std::array<float, 8> weight;
    };

    int dim() const { return dim_; }
    const std::vector<int>& shape() const { return shape_; }
    std::size_t cells() const { return rows_.size(); }
    int stencil() const { return 1 << dim_; }
    const Row& row(std::size_t i) const { return rows_[i]; }

    friend AdvectionCoeffs build_coeffs(const GridField& v, float dt);

private:
    int dim_ = 0;
    std::vector<int> shape_;
    std::vector<Row> rows_;
};

//! Coefficients for backtracing by dt along v (v in cells-per-frame at the
//! target resolution). Source positions are clamped to the domain, so every
//! row stays a convex combination of in-domain cells.
AdvectionCoeffs build_coeffs(const GridField& v, float dt);

//! out = M y. Linear in y; zero velocity gives the bit-exact identity.
GridField advect_apply(const AdvectionCoeffs& c, const GridField& y);

//! out = M^T g, the gradient of advect_apply with respect to y.
GridField advect_apply_transpose(const AdvectionCoeffs& c, const GridField& g);

//! {A(f_prev, v_prev), f_mid, A(f_next, -v_next)}: registers the outer frames
//! onto the middle one. Velocities must already be at the frames' resolution.
std::array<GridField, 3> align_triplet(const GridField& f_prev, const GridField& f_mid,
                                       const GridField& f_next, const GridField& v_prev,
                                       const GridField& v_next);

} // namespace tempogan
