#pragma once

#include "tempogan/field.hpp"
#include "tempogan/tensor.hpp"

#include <array>
#include <string>
#include <vector>

namespace tempogan {

enum class TemporalMode { none, l2t, dt_unaligned, dt_aligned };

TemporalMode temporal_mode_from_string(const std::string& s);
std::string to_string(TemporalMode m);

//! Generator loss weights. lambda_f may be negative; feature and L1 norms are
//! means over elements so the weights transfer across tile sizes.
struct LossWeights {
    double lambda_l1 = 5.0;
    std::array<double, 4> lambda_f = {-1e-5, -1e-5, -1e-5, -1e-5};
    TemporalMode temporal = TemporalMode::dt_aligned;
    bool l2t_double_sided = true;
    double lambda_l2t = 1.0;
    //! false: no discriminators at all; the generator trains on a plain L2
    //! regression to the target (comparison baseline).
    bool adversarial = true;
};

//! Probabilities are clamped to [eps, 1-eps] before logs.
constexpr double kProbEps = 1e-7;

template <typename T>
T clamp_prob(T p);

//! Binary cross entropy of a discriminator:
//! mean[-log D(real)] + mean[-log(1 - D(fake))].
template <typename T>
T d_loss(const std::vector<T>& real_probs, const std::vector<T>& fake_probs);

//! Non-saturating generator term: mean[-log D_s] + mean[-log D_t]; the
//! temporal vector may be empty when no temporal discriminator is active.
template <typename T>
T g_adv_loss(const std::vector<T>& fake_probs_s, const std::vector<T>& fake_probs_t);

//! lambda * mean |a - b|.
template <typename T>
T l1_loss(const Tensor<T>& a, const Tensor<T>& b, T lambda);

//! sum_j lambda_f[j] * mean ||F^j(a) - F^j(b)||^2 over the four feature maps.
template <typename T>
T feature_loss(const std::array<Tensor<T>, 4>& fa, const std::array<Tensor<T>, 4>& fb,
               const std::array<double, 4>& lambda_f);

//! L2 temporal loss on a frame triplet of generated densities:
//! mean (g_mid - A(g_prev, v_prev))^2 [+ mean (g_mid - A(g_next, -v_next))^2].
//! Velocities are the low-res inputs; they are upsampled by `scale`
//! (velocity units) before advection.
double l2_temporal(const GridField& g_prev, const GridField& g_mid, const GridField& g_next,
                   const GridField& vx_prev, const GridField& vx_next, int scale,
                   bool double_sided);

//! Per-component view of one generator loss evaluation.
struct GLossBreakdown {
    double adv_s = 0.0;
    double adv_t = 0.0;
    double feature = 0.0;
    double l1 = 0.0;
    double l2t = 0.0;
    double total() const { return adv_s + adv_t + feature + l1 + l2t; }
};

} // namespace tempogan
