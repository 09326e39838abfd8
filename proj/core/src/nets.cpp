#include "tempogan/nets.hpp"

#include <cmath>
#include <stdexcept>

namespace tempogan {

void GeneratorConfig::validate() const {
    if (rank < 2 || rank > 3) throw std::runtime_error("GeneratorConfig: rank must be 2 or 3");
    if (blocks.empty()) throw std::runtime_error("GeneratorConfig: needs residual blocks");
    if (blocks.back()[1] != 1)
        throw std::runtime_error("GeneratorConfig: final block must output 1 channel");
    if (in_channels < 1) throw std::runtime_error("GeneratorConfig: in_channels must be >= 1");
    if (upsample < 1) throw std::runtime_error("GeneratorConfig: upsample must be >= 1");
}

void DiscriminatorConfig::validate() const {
    if (rank < 2 || rank > 3) throw std::runtime_error("DiscriminatorConfig: rank must be 2 or 3");
    if (channels.size() != strides.size())
        throw std::runtime_error("DiscriminatorConfig: channels/strides size mismatch");
    for (int s : strides)
        if (kernel % s != 0)
            throw std::runtime_error("DiscriminatorConfig: kernel size must be divisible by stride");
}

int DiscriminatorConfig::fc_features() const {
    int s = input_size;
    for (int st : strides) s = (s + st - 1) / st;
    int features = channels.back();
    for (int a = 0; a < rank; ++a) features *= s;
    return features;
}

template <typename T>
Generator<T>::Generator(const GeneratorConfig& cfg, Rng rng) : cfg_(cfg) {
    cfg_.validate();
    int in_c = cfg_.in_channels;
    for (std::size_t i = 0; i < cfg_.blocks.size(); ++i) {
        Block blk;
        const bool last = i + 1 == cfg_.blocks.size();
        blk.use_bn = cfg_.batch_norm && !last;
        const int ca = cfg_.blocks[i][0], cb = cfg_.blocks[i][1];
        blk.conv_a.init(cfg_.rank, in_c, ca, cfg_.kernel, 1, rng, T(cfg_.init_std));
        blk.conv_b.init(cfg_.rank, ca, cb, cfg_.kernel, 1, rng, T(cfg_.init_std));
        blk.conv_s.init(cfg_.rank, in_c, cb, 1, 1, rng, T(cfg_.init_std));
        if (blk.use_bn) {
            blk.bn_a.init(ca, T(cfg_.bn_eps), T(cfg_.bn_momentum));
            blk.bn_b.init(cb, T(cfg_.bn_eps), T(cfg_.bn_momentum));
            blk.bn_s.init(cb, T(cfg_.bn_eps), T(cfg_.bn_momentum));
        }
        blocks_.push_back(std::move(blk));
        in_c = cb;
    }
}

template <typename T>
Tensor<T> Generator<T>::forward(const Tensor<T>& x, Pass& pass, NetMode mode,
                                bool update_running) {
    pass.up = nearest_upsample(x, cfg_.upsample);
    pass.blocks.assign(blocks_.size(), {});
    const Tensor<T>* cur = &pass.up;
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        Block& blk = blocks_[i];
        auto& cache = pass.blocks[i];
        Tensor<T> a = blk.conv_a.forward(*cur);
        if (blk.use_bn) a = blk.bn_a.forward(a, mode, update_running, cache.bn_a);
        cache.a_act = relu(a);
        Tensor<T> bmain = blk.conv_b.forward(cache.a_act);
        if (blk.use_bn) bmain = blk.bn_b.forward(bmain, mode, update_running, cache.bn_b);
        Tensor<T> skip = blk.conv_s.forward(*cur);
        if (blk.use_bn) skip = blk.bn_s.forward(skip, mode, update_running, cache.bn_s);
        for (std::size_t j = 0; j < bmain.size(); ++j) bmain.data[j] += skip.data[j];
        cache.out = relu(bmain);
        cur = &cache.out;
    }
    return pass.blocks.back().out;
}

template <typename T>
void Generator<T>::backward(const Tensor<T>& x, const Tensor<T>& gout, Pass& pass) {
    (void)x;
    Tensor<T> g = gout;
    for (std::size_t ii = blocks_.size(); ii-- > 0;) {
        Block& blk = blocks_[ii];
        auto& cache = pass.blocks[ii];
        const Tensor<T>& xin = ii == 0 ? pass.up : pass.blocks[ii - 1].out;
        const bool need_gx = ii > 0; // the upsample layer has no parameters

        Tensor<T> gsum = relu_backward(g, cache.out);

        // main branch: conv_b (+BN)
        Tensor<T> gb = blk.use_bn ? blk.bn_b.backward(gsum, cache.bn_b, true) : gsum;
        Tensor<T> ga_act;
        blk.conv_b.backward(cache.a_act, gb, &ga_act, true);
        Tensor<T> ga = relu_backward(ga_act, cache.a_act);
        if (blk.use_bn) ga = blk.bn_a.backward(ga, cache.bn_a, true);
        Tensor<T> gx_a;
        blk.conv_a.backward(xin, ga, need_gx ? &gx_a : nullptr, true);

        // skip branch: conv_s (+BN)
        Tensor<T> gs = blk.use_bn ? blk.bn_s.backward(gsum, cache.bn_s, true) : gsum;
        Tensor<T> gx_s;
        blk.conv_s.backward(xin, gs, need_gx ? &gx_s : nullptr, true);

        if (need_gx) {
            for (std::size_t j = 0; j < gx_a.size(); ++j) gx_a.data[j] += gx_s.data[j];
            g = std::move(gx_a);
        }
    }
}

template <typename T>
std::vector<ParamView<T>> Generator<T>::params() {
    std::vector<ParamView<T>> out;
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        Block& blk = blocks_[i];
        const std::string base = "g.b" + std::to_string(i) + ".";
        out.push_back({base + "conv_a.w", &blk.conv_a.w, &blk.conv_a.gw});
        out.push_back({base + "conv_a.b", &blk.conv_a.b, &blk.conv_a.gb});
        out.push_back({base + "conv_b.w", &blk.conv_b.w, &blk.conv_b.gw});
        out.push_back({base + "conv_b.b", &blk.conv_b.b, &blk.conv_b.gb});
        out.push_back({base + "conv_s.w", &blk.conv_s.w, &blk.conv_s.gw});
        out.push_back({base + "conv_s.b", &blk.conv_s.b, &blk.conv_s.gb});
        if (blk.use_bn) {
            out.push_back({base + "bn_a.gamma", &blk.bn_a.gamma, &blk.bn_a.ggamma});
            out.push_back({base + "bn_a.beta", &blk.bn_a.beta, &blk.bn_a.gbeta});
            out.push_back({base + "bn_b.gamma", &blk.bn_b.gamma, &blk.bn_b.ggamma});
            out.push_back({base + "bn_b.beta", &blk.bn_b.beta, &blk.bn_b.gbeta});
            out.push_back({base + "bn_s.gamma", &blk.bn_s.gamma, &blk.bn_s.ggamma});
            out.push_back({base + "bn_s.beta", &blk.bn_s.beta, &blk.bn_s.gbeta});
        }
    }
    return out;
}

template <typename T>
std::vector<StateView<T>> Generator<T>::state() {
    std::vector<StateView<T>> out;
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        Block& blk = blocks_[i];
        if (!blk.use_bn) continue;
        const std::string base = "g.b" + std::to_string(i) + ".";
        out.push_back({base + "bn_a.rmean", &blk.bn_a.running_mean});
        out.push_back({base + "bn_a.rvar", &blk.bn_a.running_var});
        out.push_back({base + "bn_b.rmean", &blk.bn_b.running_mean});
        out.push_back({base + "bn_b.rvar", &blk.bn_b.running_var});
        out.push_back({base + "bn_s.rmean", &blk.bn_s.running_mean});
        out.push_back({base + "bn_s.rvar", &blk.bn_s.running_var});
    }
    return out;
}

template <typename T>
std::vector<LayerParamCount> Generator<T>::parameter_breakdown() const {
    std::vector<LayerParamCount> out;
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        const Block& blk = blocks_[i];
        const std::string base = "RB" + std::to_string(i) + ".";
        const std::size_t bn_a = blk.use_bn ? blk.bn_a.gamma.size() * 2 : 0;
        const std::size_t bn_b = blk.use_bn ? blk.bn_b.gamma.size() * 2 : 0;
        const std::size_t bn_s = blk.use_bn ? blk.bn_s.gamma.size() * 2 : 0;
        out.push_back({base + "conv_a", blk.conv_a.w.size(), blk.conv_a.b.size(), bn_a});
        out.push_back({base + "conv_b", blk.conv_b.w.size(), blk.conv_b.b.size(), bn_b});
        out.push_back({base + "conv_s", blk.conv_s.w.size(), blk.conv_s.b.size(), bn_s});
    }
    return out;
}

template <typename T>
void Generator<T>::zero_grad() {
    for (Block& blk : blocks_) {
        blk.conv_a.zero_grad();
        blk.conv_b.zero_grad();
        blk.conv_s.zero_grad();
        if (blk.use_bn) {
            blk.bn_a.zero_grad();
            blk.bn_b.zero_grad();
            blk.bn_s.zero_grad();
        }
    }
}

template <typename T>
Discriminator<T>::Discriminator(const DiscriminatorConfig& cfg, Rng rng) : cfg_(cfg) {
    cfg_.validate();
    int in_c = cfg_.in_channels;
    for (std::size_t i = 0; i < 4; ++i) {
        convs_[i].init(cfg_.rank, in_c, cfg_.channels[i], cfg_.kernel, cfg_.strides[i], rng,
                       T(cfg_.init_std));
        if (i > 0) bns_[i].init(cfg_.channels[i], T(cfg_.bn_eps), T(cfg_.bn_momentum));
        in_c = cfg_.channels[i];
    }
    fc_.init(cfg_.fc_features(), 1, rng, T(cfg_.init_std));
}

template <typename T>
Tensor<T> Discriminator<T>::forward(const Tensor<T>& x, Pass& pass, NetMode mode,
                                    bool update_running) {
    pass.input = x;
    const Tensor<T>* cur = &pass.input;
    for (std::size_t i = 0; i < 4; ++i) {
        Tensor<T> z = convs_[i].forward(*cur);
        if (i > 0) z = bns_[i].forward(z, mode, update_running, pass.bn[i]);
        pass.act[i] = leaky_relu(z, T(cfg_.leaky_slope));
        cur = &pass.act[i];
    }
    const int N = x.n();
    const int features = int(pass.act[3].size() / std::size_t(N));
    if (features != fc_.in_features)
        throw std::runtime_error("Discriminator: input size does not match the FC layer");
    Tensor<T> flat = pass.act[3];
    flat.shape = {N, features};
    pass.logits = fc_.forward(flat);
    pass.probs = sigmoid(pass.logits);
    return pass.probs;
}

template <typename T>
Tensor<T> Discriminator<T>::backward(Pass& pass, const Tensor<T>& dlogit,
                                     const std::array<Tensor<T>, 4>* feature_grads,
                                     bool need_input_grad, bool accumulate_params) {
    const int N = pass.input.n();
    Tensor<T> flat = pass.act[3];
    flat.shape = {N, fc_.in_features};
    Tensor<T> gflat;
    fc_.backward(flat, dlogit, &gflat, accumulate_params);
    Tensor<T> g = gflat;
    g.shape = pass.act[3].shape;

    for (std::size_t ii = 4; ii-- > 0;) {
        if (feature_grads && (*feature_grads)[ii].size() == g.size())
            for (std::size_t j = 0; j < g.size(); ++j) g.data[j] += (*feature_grads)[ii].data[j];
        g = leaky_relu_backward(g, pass.act[ii], T(cfg_.leaky_slope));
        if (ii > 0) g = bns_[ii].backward(g, pass.bn[ii], accumulate_params);
        const Tensor<T>& xin = ii == 0 ? pass.input : pass.act[ii - 1];
        Tensor<T> gx;
        const bool want = ii > 0 || need_input_grad;
        convs_[ii].backward(xin, g, want ? &gx : nullptr, accumulate_params);
        g = std::move(gx);
    }
    return g;
}

template <typename T>
std::vector<ParamView<T>> Discriminator<T>::params() {
    std::vector<ParamView<T>> out;
    for (std::size_t i = 0; i < 4; ++i) {
        const std::string base = "d.c" + std::to_string(i) + ".";
        out.push_back({base + "w", &convs_[i].w, &convs_[i].gw});
        out.push_back({base + "b", &convs_[i].b, &convs_[i].gb});
        if (i > 0) {
            out.push_back({base + "bn.gamma", &bns_[i].gamma, &bns_[i].ggamma});
            out.push_back({base + "bn.beta", &bns_[i].beta, &bns_[i].gbeta});
        }
    }
    out.push_back({"d.fc.w", &fc_.w, &fc_.gw});
    out.push_back({"d.fc.b", &fc_.b, &fc_.gb});
    return out;
}

template <typename T>
std::vector<StateView<T>> Discriminator<T>::state() {
    std::vector<StateView<T>> out;
    for (std::size_t i = 1; i < 4; ++i) {
        const std::string base = "d.c" + std::to_string(i) + ".bn.";
        out.push_back({base + "rmean", &bns_[i].running_mean});
        out.push_back({base + "rvar", &bns_[i].running_var});
    }
    return out;
}

template <typename T>
std::vector<LayerParamCount> Discriminator<T>::parameter_breakdown() const {
    std::vector<LayerParamCount> out;
    for (std::size_t i = 0; i < 4; ++i) {
        const std::size_t bn = i > 0 ? bns_[i].gamma.size() * 2 : 0;
        out.push_back({"C" + std::to_string(i), convs_[i].w.size(), convs_[i].b.size(), bn});
    }
    out.push_back({"FC", fc_.w.size(), fc_.b.size(), 0});
    return out;
}

template <typename T>
void Discriminator<T>::zero_grad() {
    for (auto& c : convs_) c.zero_grad();
    for (std::size_t i = 1; i < 4; ++i) bns_[i].zero_grad();
    fc_.zero_grad();
}

template <typename T>
Tensor<T> ds_forward(Discriminator<T>& d, const Tensor<T>& x_density, const Tensor<T>& y_density,
                     typename Discriminator<T>::Pass& pass, NetMode mode, bool update_running) {
    const int factor = y_density.shape[2] / x_density.shape[2];
    Tensor<T> up = nearest_upsample(x_density, factor);
    if (up.shape != y_density.shape)
        throw std::runtime_error("ds_forward: candidate must be factor * condition size");
    Tensor<T> stacked = concat_channels<T>({&up, &y_density});
    return d.forward(stacked, pass, mode, update_running);
}

template <typename T>
Tensor<T> ds_backward(Discriminator<T>& d, typename Discriminator<T>::Pass& pass,
                      const Tensor<T>& dlogit, const std::array<Tensor<T>, 4>* feature_grads,
                      bool accumulate_params) {
    Tensor<T> gin = d.backward(pass, dlogit, feature_grads, true, accumulate_params);
    // keep only the candidate channel (channel 1)
    std::vector<int> shape = gin.shape;
    shape[1] = 1;
    Tensor<T> gy(shape);
    const int N = gin.n();
    const std::size_t plane = gin.spatial();
    for (int s = 0; s < N; ++s)
        std::copy(gin.sample(s) + plane, gin.sample(s) + 2 * plane, gy.sample(s));
    return gy;
}

template <typename T>
Tensor<T> dt_forward(Discriminator<T>& d, const Tensor<T>& f_prev, const Tensor<T>& f_mid,
                     const Tensor<T>& f_next, typename Discriminator<T>::Pass& pass, NetMode mode,
                     bool update_running) {
    Tensor<T> stacked = concat_channels<T>({&f_prev, &f_mid, &f_next});
    return d.forward(stacked, pass, mode, update_running);
}

template <typename T>
std::array<Tensor<T>, 3> dt_backward(Discriminator<T>& d, typename Discriminator<T>::Pass& pass,
                                     const Tensor<T>& dlogit, bool accumulate_params) {
    Tensor<T> gin = d.backward(pass, dlogit, nullptr, true, accumulate_params);
    std::vector<int> shape = gin.shape;
    shape[1] = 1;
    std::array<Tensor<T>, 3> out = {Tensor<T>(shape), Tensor<T>(shape), Tensor<T>(shape)};
    const int N = gin.n();
    const std::size_t plane = gin.spatial();
    for (int s = 0; s < N; ++s)
        for (int f = 0; f < 3; ++f)
            std::copy(gin.sample(s) + std::size_t(f) * plane, gin.sample(s) + std::size_t(f + 1) * plane,
                      out[size_t(f)].sample(s));
    return out;
}

std::size_t conv_fc_count(const std::vector<LayerParamCount>& breakdown) {
    std::size_t n = 0;
    for (const auto& l : breakdown) n += l.weights + l.biases;
    return n;
}

std::size_t bn_count(const std::vector<LayerParamCount>& breakdown) {
    std::size_t n = 0;
    for (const auto& l : breakdown) n += l.bn;
    return n;
}

#define TG_INSTANTIATE_NETS(T)                                                                  \
    template class Generator<T>;                                                                \
    template class Discriminator<T>;                                                            \
    template Tensor<T> ds_forward<T>(Discriminator<T>&, const Tensor<T>&, const Tensor<T>&,     \
                                     typename Discriminator<T>::Pass&, NetMode, bool);          \
    template Tensor<T> ds_backward<T>(Discriminator<T>&, typename Discriminator<T>::Pass&,      \
                                      const Tensor<T>&, const std::array<Tensor<T>, 4>*, bool); \
    template Tensor<T> dt_forward<T>(Discriminator<T>&, const Tensor<T>&, const Tensor<T>&,     \
                                     const Tensor<T>&, typename Discriminator<T>::Pass&,        \
                                     NetMode, bool);                                            \
    template std::array<Tensor<T>, 3> dt_backward<T>(                                           \
        Discriminator<T>&, typename Discriminator<T>::Pass&, const Tensor<T>&, bool);

TG_INSTANTIATE_NETS(float)
TG_INSTANTIATE_NETS(double)
#undef TG_INSTANTIATE_NETS

} // namespace tempogan
