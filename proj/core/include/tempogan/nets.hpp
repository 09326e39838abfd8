#pragma once

#include "tempogan/layers.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace tempogan {

//! Fully convolutional residual generator: nearest-neighbor upsampling to the
//! output resolution, then residual blocks
//! [conv_a, (BN), ReLU, conv_b, (BN)] + [conv_s 1x1, (BN)], ReLU.
//! Batch norm is dropped in the last block, which maps to a single density
//! channel through a final ReLU.
struct GeneratorConfig {
    int rank = 2;
    int in_channels = 3; // density + velocity in 2D; 4 with vorticity
    int upsample = 4;
    int kernel = 5;
    std::vector<std::array<int, 2>> blocks = {{8, 32}, {128, 128}, {32, 8}, {2, 1}};
    bool batch_norm = true;
    double bn_eps = 1e-5;
    double bn_momentum = 0.9;
    double init_std = 0.02;

    void validate() const;
};

//! Four strided convolutions with leaky ReLU (batch norm except the first
//! layer) and a fully connected sigmoid classifier. input_size fixes the FC
//! width; the spatial discriminator sees 2 channels (upsampled condition +
//! candidate), the temporal one 3 stacked frames.
struct DiscriminatorConfig {
    int rank = 2;
    int in_channels = 2;
    int kernel = 4;
    std::vector<int> channels = {32, 64, 128, 256};
    std::vector<int> strides = {2, 2, 2, 1};
    int input_size = 64;
    double leaky_slope = 0.2;
    double bn_eps = 1e-5;
    double bn_momentum = 0.9;
    double init_std = 0.02;

    void validate() const;
    int fc_features() const;
};

struct LayerParamCount {
    std::string name;
    std::size_t weights = 0;
    std::size_t biases = 0;
    std::size_t bn = 0; // batch-norm affine parameters, listed separately
};

template <typename T>
class Generator {
public:
    Generator() = default;
    Generator(const GeneratorConfig& cfg, Rng rng);

    struct Block {
        Conv<T> conv_a, conv_b, conv_s;
        BatchNorm<T> bn_a, bn_b, bn_s;
        bool use_bn = false;
    };

    struct Pass {
        Tensor<T> up;
        struct BlockCache {
            Tensor<T> a_act; // after conv_a (+BN) + ReLU
            Tensor<T> out;   // block output (after final ReLU)
            BNCache<T> bn_a, bn_b, bn_s;
        };
        std::vector<BlockCache> blocks;
    };

    //! x: (N, in_channels, spatial...); returns (N, 1, spatial * upsample).
    Tensor<T> forward(const Tensor<T>& x, Pass& pass, NetMode mode, bool update_running);
    //! Accumulates parameter gradients from d(loss)/d(output).
    void backward(const Tensor<T>& x, const Tensor<T>& gout, Pass& pass);

    std::vector<ParamView<T>> params();
    std::vector<StateView<T>> state(); // BN running stats
    std::vector<LayerParamCount> parameter_breakdown() const;
    void zero_grad();

    const GeneratorConfig& config() const { return cfg_; }

private:
    GeneratorConfig cfg_;
    std::vector<Block> blocks_;
};

template <typename T>
class Discriminator {
public:
    Discriminator() = default;
    Discriminator(const DiscriminatorConfig& cfg, Rng rng);

    struct Pass {
        Tensor<T> input;
        std::array<Tensor<T>, 4> act; // post-activation feature maps F^1..F^4
        std::array<BNCache<T>, 4> bn; // [0] unused (no BN on the first layer)
        Tensor<T> logits; // (N, 1)
        Tensor<T> probs;  // sigmoid(logits)
    };

    //! x: (N, in_channels, s, s); returns probabilities in (0, 1).
    Tensor<T> forward(const Tensor<T>& x, Pass& pass, NetMode mode, bool update_running);

    //! dlogit: (N, 1). feature_grads, when non-null, adds gradients directly
    //! on the four post-activation feature maps (feature-space loss).
    //! Returns gradient w.r.t. the input when need_input_grad.
    Tensor<T> backward(Pass& pass, const Tensor<T>& dlogit,
                       const std::array<Tensor<T>, 4>* feature_grads, bool need_input_grad,
                       bool accumulate_params);

    std::vector<ParamView<T>> params();
    std::vector<StateView<T>> state();
    std::vector<LayerParamCount> parameter_breakdown() const;
    void zero_grad();

    const DiscriminatorConfig& config() const { return cfg_; }

private:
    DiscriminatorConfig cfg_;
    std::array<Conv<T>, 4> convs_;
    std::array<BatchNorm<T>, 4> bns_; // [0] unused
    Dense<T> fc_;
};

//! Conditional spatial-discriminator step: upsample the low-res density to
//! the candidate's resolution, stack both as channels and classify.
template <typename T>
Tensor<T> ds_forward(Discriminator<T>& d, const Tensor<T>& x_density, const Tensor<T>& y_density,
                     typename Discriminator<T>::Pass& pass, NetMode mode, bool update_running);

//! Gradient of ds_forward w.r.t. the candidate y (the conditional channel is
//! data, its gradient is dropped).
template <typename T>
Tensor<T> ds_backward(Discriminator<T>& d, typename Discriminator<T>::Pass& pass,
                      const Tensor<T>& dlogit, const std::array<Tensor<T>, 4>* feature_grads,
                      bool accumulate_params);

//! Temporal discriminator on three stacked frames (no conditional input).
template <typename T>
Tensor<T> dt_forward(Discriminator<T>& d, const Tensor<T>& f_prev, const Tensor<T>& f_mid,
                     const Tensor<T>& f_next, typename Discriminator<T>::Pass& pass, NetMode mode,
                     bool update_running);

//! Gradients w.r.t. the three input frames.
template <typename T>
std::array<Tensor<T>, 3> dt_backward(Discriminator<T>& d, typename Discriminator<T>::Pass& pass,
                                     const Tensor<T>& dlogit, bool accumulate_params);

std::size_t conv_fc_count(const std::vector<LayerParamCount>& breakdown);
std::size_t bn_count(const std::vector<LayerParamCount>& breakdown);

} // namespace tempogan
