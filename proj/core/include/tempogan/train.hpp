#pragma once

#include "tempogan/batch.hpp"
#include "tempogan/losses.hpp"
#include "tempogan/manifest.hpp"
#include "tempogan/nets.hpp"

#include <memory>
#include <string>
#include <vector>

namespace tempogan {

struct TrainConfig {
    int iterations = 40000;
    int batch_size = 16;
    int k_ds = 2, k_dt = 2, k_g = 2;
    double lr = 2e-4;
    double adam_beta1 = 0.5, adam_beta2 = 0.999, adam_eps = 1e-8;
    uint64_t seed = 1;
    int checkpoint_every = 2000;
    int tile_lo = 16;
    bool augment = true;
    InputFields fields = InputFields::density_velocity;

    void validate() const; // k's >= 1, iterations even
};

//! Piecewise-constant schedule: lr for the first half, lr/20 for the second.
double lr_schedule(int64_t iteration, const TrainConfig& cfg);

struct IterationMetrics {
    int64_t iteration = 0;
    double lr = 0;
    double loss_ds = 0, loss_dt = 0;
    GLossBreakdown g;
    double ds_real = 0, ds_fake = 0, dt_real = 0, dt_fake = 0;
};

struct TrainResult {
    std::string checkpoint_path;
    std::string metrics_path;
    int64_t iterations_run = 0;
};

//! Networks plus everything needed to rebuild them from disk.
struct ModelBundle {
    TrainConfig train;
    LossWeights weights;
    GeneratorConfig gen_cfg;
    DiscriminatorConfig ds_cfg, dt_cfg;
    Generator<float> g;
    Discriminator<float> ds, dt;
    int64_t iteration = 0;
};

uint64_t architecture_hash(const GeneratorConfig& g, const DiscriminatorConfig& ds,
                           const DiscriminatorConfig& dt);

//! Alternating optimization: k_ds spatial-discriminator updates, k_dt
//! temporal-discriminator updates on advection-aligned triplets, k_g
//! generator updates on the combined loss, each on a fresh augmented batch.
class Trainer {
public:
    Trainer(const DatasetManifest& manifest, TrainConfig cfg, LossWeights weights,
            GeneratorConfig gen_cfg, std::string out_dir);

    TrainResult run();

    //! One optimizer round at the given iteration index (exposed for tests).
    IterationMetrics step(int64_t iteration);

    Generator<float>& generator() { return model_->g; }
    Discriminator<float>& spatial_discriminator() { return model_->ds; }
    Discriminator<float>& temporal_discriminator() { return model_->dt; }
    ModelBundle& model() { return *model_; }
    const std::vector<IterationMetrics>& history() const { return history_; }
    const TileSampler& sampler() const { return sampler_; }

    void save_checkpoint_file(const std::string& path);
    int64_t load_checkpoint_file(const std::string& path);

private:
    void ds_update(double lr, IterationMetrics& m);
    void dt_update(double lr, IterationMetrics& m);
    void g_update(double lr, IterationMetrics& m);

    std::unique_ptr<ModelBundle> model_;
    TileSampler sampler_;
    Adam<float> adam_g_, adam_ds_, adam_dt_;
    std::string out_dir_;
    uint64_t batch_counter_ = 0;
    std::vector<IterationMetrics> history_;
    std::string last_checkpoint_;
};

//! Mean post-sigmoid outputs over test batches, split by real/fake. Inference
//! mode (running BN statistics), so repeated calls agree bit-exactly.
struct BalanceReport {
    double ds_real = 0, ds_fake = 0;
    double dt_real = 0, dt_fake = 0;
};

BalanceReport eval_discriminator_balance(ModelBundle& model, const DatasetManifest& manifest,
                                         const std::string& split, int batches, int batch_size,
                                         int tile_lo, uint64_t seed);

//! CSV metrics log; one row per iteration.
class MetricsWriter {
public:
    explicit MetricsWriter(const std::string& path);
    ~MetricsWriter();
    void write(const IterationMetrics& m);
    const std::string& path() const { return path_; }

private:
    std::string path_;
    void* file_ = nullptr;
};

//! Per-sample advection of (N,1,H,W) tensors with prebuilt rows; transpose
//! applies M^T (the gradient path).
Tensor<float> advect_batch(const std::vector<AdvectionCoeffs>& coeffs, const Tensor<float>& t,
                           bool transpose);

} // namespace tempogan
