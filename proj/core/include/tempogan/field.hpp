#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace tempogan {

//! Scalar or vector field on a uniform, cell-centered, collocated grid.
//!
//! Axis convention: axis 0 = x, axis 1 = y (vertical), axis 2 = z. Storage is
//! row-major over [x][y][z] with channels interleaved innermost, i.e.
//! data[(x*ny + y)*channels + c] in 2D. Velocity channel c is the component
//! along axis c, measured in cells-per-frame at the field's own resolution.
//! All values are expected to stay finite; ops in this module never produce
//! NaN/Inf from finite inputs.
class GridField {
public:
    GridField() = default;
    GridField(std::vector<int> shape, int channels, float fill = 0.0f);

    int dim() const { return int(shape_.size()); }
    const std::vector<int>& shape() const { return shape_; }
    int shape(int axis) const { return shape_[size_t(axis)]; }
    int channels() const { return channels_; }
    std::size_t cell_count() const;
    std::size_t size() const { return data_.size(); }

    float* data() { return data_.data(); }
    const float* data() const { return data_.data(); }
    std::vector<float>& values() { return data_; }
    const std::vector<float>& values() const { return data_; }

    //! Linear cell index (channel not included).
    std::size_t cell_index(const int* pos) const;

    float& at(const int* pos, int c) { return data_[cell_index(pos) * channels_ + c]; }
    float at(const int* pos, int c) const { return data_[cell_index(pos) * channels_ + c]; }
    float& at2(int x, int y, int c = 0);
    float at2(int x, int y, int c = 0) const;
    float& at3(int x, int y, int z, int c = 0);
    float at3(int x, int y, int z, int c = 0) const;

    bool same_layout(const GridField& o) const {
        return shape_ == o.shape_ && channels_ == o.channels_;
    }

    //! True if every value is finite.
    bool all_finite() const;

private:
    std::vector<int> shape_;
    int channels_ = 0;
    std::vector<float> data_;
};

//! Multilinear interpolation of cell-centered samples at a continuous
//! position; clamp-to-edge outside the domain. `out` receives channels()
//! values.
void sample_linear(const GridField& f, const double* pos, float* out);

//! Convenience scalar variant for single-channel fields.
float sample_linear_scalar(const GridField& f, const double* pos);

//! Curl of a velocity field: 1 channel in 2D (dv_y/dx - dv_x/dy), 3 channels
//! in 3D. Central differences in the interior, one-sided at the boundary.
//! Throws for grids smaller than 3 cells per axis.
GridField curl(const GridField& v);

//! Divergence of a velocity field, defined as the exact negative adjoint of
//! the mirrored central-difference gradient used by the pressure projection.
//! In the interior this reduces to plain central differences.
GridField divergence(const GridField& v);

float max_abs_divergence(const GridField& v);

enum class ResampleKind { passive, velocity };

//! Block average by an integer factor. Velocity fields are additionally
//! divided by the factor (cells-per-frame units follow the resolution).
//! Throws if a shape is not divisible by the factor.
GridField downsample(const GridField& f, int factor, ResampleKind kind);

//! Nearest-neighbor replication by an integer factor. Velocity fields are
//! multiplied by the factor.
GridField upsample_nn(const GridField& f, int factor, ResampleKind kind);

} // namespace tempogan
