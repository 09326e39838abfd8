#pragma once

#include "tempogan/rng.hpp"
#include "tempogan/tensor.hpp"

#include <string>
#include <vector>

namespace tempogan {

enum class NetMode { train, eval };

//! N-d convolution (2D or 3D spatial rank) with TF-style SAME padding:
//! out = ceil(in / stride), extra padding goes to the high side. Kernel and
//! stride are shared across axes (kernel size divisible by stride for the
//! strided discriminator layers).
template <typename T>
struct Conv {
    int rank = 2;
    int in_ch = 0, out_ch = 0, kernel = 3, stride = 1;
    std::vector<T> w; // [out_ch][in_ch][k]^rank row-major
    std::vector<T> b;
    std::vector<T> gw, gb;

    void init(int rank_, int in_c, int out_c, int k, int s, Rng& rng, T init_std);
    std::size_t weight_count() const { return w.size() + b.size(); }

    std::vector<int> out_shape(const std::vector<int>& in_shape) const;

    Tensor<T> forward(const Tensor<T>& x) const;
    //! Rebuilds the im2col buffer from x; accumulates into gw/gb when
    //! accumulate_params, writes input gradient when gx != nullptr.
    void backward(const Tensor<T>& x, const Tensor<T>& gy, Tensor<T>* gx, bool accumulate_params);

    void zero_grad();
};

template <typename T>
struct BNCache {
    std::vector<T> invstd;  // per channel
    Tensor<T> xhat;
    bool training = true;
};

//! Per-channel batch normalization with running statistics
//! (running = momentum * running + (1 - momentum) * batch).
template <typename T>
struct BatchNorm {
    int channels = 0;
    T eps = T(1e-5);
    T momentum = T(0.9);
    std::vector<T> gamma, beta;
    std::vector<T> ggamma, gbeta;
    std::vector<T> running_mean, running_var;

    void init(int c, T eps_, T momentum_);
    Tensor<T> forward(const Tensor<T>& x, NetMode mode, bool update_running, BNCache<T>& cache);
    Tensor<T> backward(const Tensor<T>& gy, const BNCache<T>& cache, bool accumulate_params);
    void zero_grad();
};

//! Fully connected layer on flattened samples.
template <typename T>
struct Dense {
    int in_features = 0, out_features = 0;
    std::vector<T> w; // [out][in]
    std::vector<T> b;
    std::vector<T> gw, gb;

    void init(int in_f, int out_f, Rng& rng, T init_std);
    std::size_t weight_count() const { return w.size() + b.size(); }
    Tensor<T> forward(const Tensor<T>& x) const; // x (N, in) -> (N, out)
    void backward(const Tensor<T>& x, const Tensor<T>& gy, Tensor<T>* gx, bool accumulate_params);
    void zero_grad();
};

template <typename T>
Tensor<T> relu(const Tensor<T>& x);
//! gx = gy where the activation output y is positive, else 0.
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& gy, const Tensor<T>& y);

template <typename T>
Tensor<T> leaky_relu(const Tensor<T>& x, T slope);
template <typename T>
Tensor<T> leaky_relu_backward(const Tensor<T>& gy, const Tensor<T>& y, T slope);

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x);

//! Nearest-neighbor spatial upsampling by an integer factor.
template <typename T>
Tensor<T> nearest_upsample(const Tensor<T>& x, int factor);
template <typename T>
Tensor<T> nearest_upsample_backward(const Tensor<T>& gy, int factor);

//! Channel concatenation of equal-spatial tensors.
template <typename T>
Tensor<T> concat_channels(const std::vector<const Tensor<T>*>& parts);

//! View of one named parameter (value + gradient) for optimizers/checkpoints.
template <typename T>
struct ParamView {
    std::string name;
    std::vector<T>* value = nullptr;
    std::vector<T>* grad = nullptr;
};

//! Non-trainable state that still belongs in a checkpoint (BN running stats).
template <typename T>
struct StateView {
    std::string name;
    std::vector<T>* value = nullptr;
};

//! ADAM with bias correction; one instance per network.
template <typename T>
class Adam {
public:
    Adam() = default;
    Adam(T beta1, T beta2, T eps) : beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(const std::vector<ParamView<T>>& params, T lr);
    int64_t steps() const { return t_; }

    //! Moment buffers for checkpointing, named after the parameters.
    std::vector<StateView<T>> state(const std::vector<ParamView<T>>& params);
    void set_steps(int64_t t) { t_ = t; }

private:
    T beta1_ = T(0.5), beta2_ = T(0.999), eps_ = T(1e-8);
    int64_t t_ = 0;
    std::vector<std::vector<T>> m_, v_;
};

} // namespace tempogan
