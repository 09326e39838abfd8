#include "tempogan/batch.hpp"

#include "tempogan/field_io.hpp"
#include "tempogan/rng.hpp"

#include <stdexcept>

namespace tempogan {

InputFields input_fields_from_string(const std::string& s) {
    if (s == "density") return InputFields::density;
    if (s == "density_velocity") return InputFields::density_velocity;
    if (s == "density_velocity_vorticity") return InputFields::density_velocity_vorticity;
    throw std::runtime_error("unknown input fields: " + s);
}

std::string to_string(InputFields f) {
    switch (f) {
    case InputFields::density: return "density";
    case InputFields::density_velocity: return "density_velocity";
    case InputFields::density_velocity_vorticity: return "density_velocity_vorticity";
    }
    return "?";
}

int input_channel_count(InputFields f, int rank) {
    switch (f) {
    case InputFields::density: return 1;
    case InputFields::density_velocity: return 1 + rank;
    case InputFields::density_velocity_vorticity: return 1 + rank + (rank == 2 ? 1 : 3);
    }
    return 0;
}

TileSampler::TileSampler(const DatasetManifest& manifest, const std::string& split,
                         BatchConfig cfg)
    : cfg_(cfg), scale_(manifest.scale) {
    for (const SimEntry* sim : manifest.split_sims(split)) {
        std::vector<int> positions;
        const int first = int(frames_.size());
        for (const FrameEntry& fe : sim->frames) {
            Frame f;
            f.sim = sim->id;
            f.index = fe.index;
            f.x_rho = read_tgf(manifest.resolve(fe.x_density));
            f.x_vel = read_tgf(manifest.resolve(fe.x_velocity));
            f.y_rho = read_tgf(manifest.resolve(fe.y_density));
            frames_.push_back(std::move(f));
        }
        for (int i = first; i < int(frames_.size()); ++i) {
            pairs_.push_back({i});
            if (i - first >= 1 && i + 1 < int(frames_.size()) &&
                frames_[size_t(i)].index - 1 == frames_[size_t(i - 1)].index &&
                frames_[size_t(i)].index + 1 == frames_[size_t(i + 1)].index)
                triplets_.push_back({i - 1, i, i + 1});
        }
    }
    if (frames_.empty()) throw std::runtime_error("TileSampler: split '" + split + "' has no frames");
    lo_shape_ = frames_[0].x_rho.shape();
    for (int a = 0; a < int(lo_shape_.size()); ++a)
        if (cfg_.tile_lo > lo_shape_[size_t(a)])
            throw std::runtime_error("TileSampler: tile larger than the low-res domain");
}

namespace {

// channel-planar copy of a grid into one tensor sample
void write_channels(Tensor<float>& t, int slot, int first_channel, const GridField& g) {
    const std::size_t plane = g.cell_count();
    const int C = g.channels();
    float* base = t.sample(slot) + std::size_t(first_channel) * plane;
    for (std::size_t i = 0; i < plane; ++i)
        for (int c = 0; c < C; ++c) base[std::size_t(c) * plane + i] = g.data()[i * std::size_t(C) + std::size_t(c)];
}

} // namespace

void TileSampler::fill_sample(uint64_t tag, uint64_t counter, int slot, const TripletRef& ref,
                              bool want_triplet, PairBatch& pair, TripletBatch* trip) const {
    Rng rng = Rng::substream(cfg_.seed ^ tag, counter, uint64_t(slot));
    const std::vector<int> tile_shape(lo_shape_.size(), cfg_.tile_lo);

    AugmentationTransform t;
    if (cfg_.augment) {
        t = sample_transform(rng, tile_shape, lo_shape_, scale_);
    } else {
        double want[3];
        for (std::size_t a = 0; a < lo_shape_.size(); ++a)
            want[a] = rng.uniform(0.0, double(lo_shape_[a] - 1));
        t = make_transform(tile_shape, lo_shape_, 1.0, 0.0, {false, false, false}, scale_, want);
    }

    const int frames_idx[3] = {ref.prev, ref.mid, ref.next};
    for (int fi = 0; fi < 3; ++fi) {
        const bool is_mid = fi == 1;
        if (!want_triplet && !is_mid) continue;
        const Frame& fr = frames_[size_t(frames_idx[fi])];

        GridField rho_tile = apply_passive(fr.x_rho, t, 1);
        GridField vel_tile = apply_directional(fr.x_vel, t, 1);
        GridField y_tile = apply_passive(fr.y_rho, t, scale_);

        Tensor<float>& x_dst = is_mid ? pair.x : (fi == 0 ? trip->x_prev : trip->x_next);
        Tensor<float>& y_dst = is_mid ? pair.y : (fi == 0 ? trip->y_prev : trip->y_next);

        write_channels(x_dst, slot, 0, rho_tile);
        if (cfg_.fields != InputFields::density) write_channels(x_dst, slot, 1, vel_tile);
        if (cfg_.fields == InputFields::density_velocity_vorticity) {
            GridField w_tile = recompute_derived(vel_tile);
            write_channels(x_dst, slot, 1 + vel_tile.channels(), w_tile);
        }
        write_channels(y_dst, slot, 0, y_tile);
        if (is_mid) write_channels(pair.x_rho, slot, 0, rho_tile);

        if (want_triplet && !is_mid) {
            GridField v_hi = upsample_nn(vel_tile, scale_, ResampleKind::velocity);
            if (fi == 0)
                trip->coeffs_prev[size_t(slot)] = build_coeffs(v_hi, 1.0f);
            else
                trip->coeffs_next[size_t(slot)] = build_coeffs(v_hi, -1.0f);
        }
    }
}

PairBatch TileSampler::pair_batch(uint64_t counter, int n) const {
    if (n < 1) throw std::runtime_error("pair_batch: empty batch");
    const int T = cfg_.tile_lo;
    const int C = input_channel_count(cfg_.fields, int(lo_shape_.size()));
    PairBatch batch;
    batch.x = Tensor<float>({n, C, T, T});
    batch.x_rho = Tensor<float>({n, 1, T, T});
    batch.y = Tensor<float>({n, 1, T * scale_, T * scale_});

#pragma omp parallel for schedule(static)
    for (int slot = 0; slot < n; ++slot) {
        Rng pick = Rng::substream(cfg_.seed ^ 0x9a17ull, counter, uint64_t(slot));
        const PairRef& ref = pairs_[size_t(pick.uniform_index(pairs_.size()))];
        fill_sample(0x9a17b0ull, counter, slot, {ref.frame, ref.frame, ref.frame}, false, batch,
                    nullptr);
    }
    return batch;
}

TripletBatch TileSampler::triplet_batch(uint64_t counter, int n) const {
    if (n < 1) throw std::runtime_error("triplet_batch: empty batch");
    if (triplets_.empty())
        throw std::runtime_error("triplet_batch: split has no consecutive frame triplets");
    const int T = cfg_.tile_lo;
    const int C = input_channel_count(cfg_.fields, int(lo_shape_.size()));
    TripletBatch batch;
    batch.center.x = Tensor<float>({n, C, T, T});
    batch.center.x_rho = Tensor<float>({n, 1, T, T});
    batch.center.y = Tensor<float>({n, 1, T * scale_, T * scale_});
    batch.x_prev = Tensor<float>({n, C, T, T});
    batch.x_next = Tensor<float>({n, C, T, T});
    batch.y_prev = Tensor<float>({n, 1, T * scale_, T * scale_});
    batch.y_next = Tensor<float>({n, 1, T * scale_, T * scale_});
    batch.coeffs_prev.resize(size_t(n));
    batch.coeffs_next.resize(size_t(n));

#pragma omp parallel for schedule(static)
    for (int slot = 0; slot < n; ++slot) {
        Rng pick = Rng::substream(cfg_.seed ^ 0x7129ull, counter, uint64_t(slot));
        const TripletRef& ref = triplets_[size_t(pick.uniform_index(triplets_.size()))];
        fill_sample(0x7129b0ull, counter, slot, ref, true, batch.center, &batch);
    }
    return batch;
}

} // namespace tempogan
