#include "tempogan/losses.hpp"

#include "tempogan/advect.hpp"

#include <cmath>
#include <stdexcept>

namespace tempogan {

TemporalMode temporal_mode_from_string(const std::string& s) {
    if (s == "none") return TemporalMode::none;
    if (s == "l2t") return TemporalMode::l2t;
    if (s == "dt_unaligned") return TemporalMode::dt_unaligned;
    if (s == "dt_aligned") return TemporalMode::dt_aligned;
    throw std::runtime_error("unknown temporal mode: " + s);
}

std::string to_string(TemporalMode m) {
    switch (m) {
    case TemporalMode::none: return "none";
    case TemporalMode::l2t: return "l2t";
    case TemporalMode::dt_unaligned: return "dt_unaligned";
    case TemporalMode::dt_aligned: return "dt_aligned";
    }
    return "?";
}

template <typename T>
T clamp_prob(T p) {
    const T eps = T(kProbEps);
    if (p < eps) return eps;
    if (p > T(1) - eps) return T(1) - eps;
    return p;
}

template <typename T>
T d_loss(const std::vector<T>& real_probs, const std::vector<T>& fake_probs) {
    double real_term = 0.0;
    for (T p : real_probs) real_term += -std::log(double(clamp_prob(p)));
    if (!real_probs.empty()) real_term /= double(real_probs.size());
    double fake_term = 0.0;
    for (T p : fake_probs) fake_term += -std::log(1.0 - double(clamp_prob(p)));
    if (!fake_probs.empty()) fake_term /= double(fake_probs.size());
    return T(real_term + fake_term);
}

template <typename T>
T g_adv_loss(const std::vector<T>& fake_probs_s, const std::vector<T>& fake_probs_t) {
    double s_term = 0.0;
    for (T p : fake_probs_s) s_term += -std::log(double(clamp_prob(p)));
    if (!fake_probs_s.empty()) s_term /= double(fake_probs_s.size());
    double t_term = 0.0;
    for (T p : fake_probs_t) t_term += -std::log(double(clamp_prob(p)));
    if (!fake_probs_t.empty()) t_term /= double(fake_probs_t.size());
    return T(s_term + t_term);
}

template <typename T>
T l1_loss(const Tensor<T>& a, const Tensor<T>& b, T lambda) {
    if (!a.same_shape(b)) throw std::runtime_error("l1_loss: shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(double(a.data[i]) - double(b.data[i]));
    return T(double(lambda) * acc / double(a.size()));
}

template <typename T>
T feature_loss(const std::array<Tensor<T>, 4>& fa, const std::array<Tensor<T>, 4>& fb,
               const std::array<double, 4>& lambda_f) {
    double total = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
        if (!fa[j].same_shape(fb[j])) throw std::runtime_error("feature_loss: layer shape mismatch");
        double acc = 0.0;
        for (std::size_t i = 0; i < fa[j].size(); ++i) {
            const double d = double(fa[j].data[i]) - double(fb[j].data[i]);
            acc += d * d;
        }
        total += lambda_f[j] * acc / double(fa[j].size());
    }
    return T(total);
}

double l2_temporal(const GridField& g_prev, const GridField& g_mid, const GridField& g_next,
                   const GridField& vx_prev, const GridField& vx_next, int scale,
                   bool double_sided) {
    GridField v_prev = scale > 1 ? upsample_nn(vx_prev, scale, ResampleKind::velocity) : vx_prev;
    GridField adv_prev = advect_apply(build_coeffs(v_prev, 1.0f), g_prev);
    double acc = 0.0;
    for (std::size_t i = 0; i < g_mid.size(); ++i) {
        const double d = double(g_mid.values()[i]) - double(adv_prev.values()[i]);
        acc += d * d;
    }
    double loss = acc / double(g_mid.size());
    if (double_sided) {
        GridField v_next = scale > 1 ? upsample_nn(vx_next, scale, ResampleKind::velocity) : vx_next;
        GridField adv_next = advect_apply(build_coeffs(v_next, -1.0f), g_next);
        double acc2 = 0.0;
        for (std::size_t i = 0; i < g_mid.size(); ++i) {
            const double d = double(g_mid.values()[i]) - double(adv_next.values()[i]);
            acc2 += d * d;
        }
        loss += acc2 / double(g_mid.size());
    }
    return loss;
}

template float clamp_prob<float>(float);
template double clamp_prob<double>(double);
template float d_loss<float>(const std::vector<float>&, const std::vector<float>&);
template double d_loss<double>(const std::vector<double>&, const std::vector<double>&);
template float g_adv_loss<float>(const std::vector<float>&, const std::vector<float>&);
template double g_adv_loss<double>(const std::vector<double>&, const std::vector<double>&);
template float l1_loss<float>(const Tensor<float>&, const Tensor<float>&, float);
template double l1_loss<double>(const Tensor<double>&, const Tensor<double>&, double);
template float feature_loss<float>(const std::array<Tensor<float>, 4>&,
                                   const std::array<Tensor<float>, 4>&,
                                   const std::array<double, 4>&);
template double feature_loss<double>(const std::array<Tensor<double>, 4>&,
                                     const std::array<Tensor<double>, 4>&,
                                     const std::array<double, 4>&);

} // namespace tempogan
