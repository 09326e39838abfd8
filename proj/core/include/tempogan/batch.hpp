#pragma once

#include "tempogan/advect.hpp"
#include "tempogan/augment.hpp"
#include "tempogan/manifest.hpp"
#include "tempogan/tensor.hpp"

#include <string>
#include <vector>

namespace tempogan {

enum class InputFields { density, density_velocity, density_velocity_vorticity };

InputFields input_fields_from_string(const std::string& s);
std::string to_string(InputFields f);
int input_channel_count(InputFields f, int rank);

struct BatchConfig {
    int tile_lo = 16;
    bool augment = true;
    InputFields fields = InputFields::density_velocity;
    uint64_t seed = 1;
};

struct PairBatch {
    Tensor<float> x;     // (N, C, T, T) generator input bundle
    Tensor<float> x_rho; // (N, 1, T, T) conditional density for D_s
    Tensor<float> y;     // (N, 1, sT, sT) high-res density target
};

struct TripletBatch {
    PairBatch center;
    Tensor<float> x_prev, x_next; // generator input bundles
    Tensor<float> y_prev, y_next; // high-res densities
    // advection rows built from the (augmented) low-res velocities, upsampled
    // to the high-res tile; one per sample
    std::vector<AdvectionCoeffs> coeffs_prev; // dt = +1 with v^(t-1)
    std::vector<AdvectionCoeffs> coeffs_next; // dt = -1 with v^(t+1)
};

//! Draws augmented training tiles from a dataset split. Every sample derives
//! its own rng substream from (seed, purpose, batch counter, slot), so batch
//! assembly parallelizes without changing results. Vorticity channels are
//! recomputed from the augmented velocity tile and discarded with the batch.
class TileSampler {
public:
    TileSampler(const DatasetManifest& manifest, const std::string& split, BatchConfig cfg);

    PairBatch pair_batch(uint64_t counter, int n) const;
    TripletBatch triplet_batch(uint64_t counter, int n) const;

    std::size_t pair_count() const { return pairs_.size(); }
    std::size_t triplet_count() const { return triplets_.size(); }
    int scale() const { return scale_; }
    const std::vector<int>& lo_shape() const { return lo_shape_; }
    const BatchConfig& config() const { return cfg_; }

    //! Whole-frame access for evaluation passes.
    struct Frame {
        int sim = 0, index = 0;
        GridField x_rho, x_vel, y_rho;
    };
    const std::vector<Frame>& frames() const { return frames_; }

private:
    struct PairRef {
        int frame = 0; // position in frames_
    };
    struct TripletRef {
        int prev = 0, mid = 0, next = 0;
    };

    void fill_sample(uint64_t tag, uint64_t counter, int slot, const TripletRef& ref,
                     bool want_triplet, PairBatch& pair, TripletBatch* trip) const;

    BatchConfig cfg_;
    int scale_ = 4;
    std::vector<int> lo_shape_;
    std::vector<Frame> frames_;
    std::vector<PairRef> pairs_;
    std::vector<TripletRef> triplets_;
};

} // namespace tempogan
