// Copyright (C) 2026 The RAVE Authors
// SPDX-License-Identifier: Apache-2.0

#include "rave/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rave/error.hpp"

namespace rave {

DiffusionSchedule::DiffusionSchedule(const ScheduleParams& params) : params_(params) {
    const int n = params.train_steps;
    const int steps = params.sampling_steps;
    if (n < 1) fail(ErrorCode::kInvalidArgument, "train_steps must be >= 1");
    if (steps < 1 || steps > n) fail(ErrorCode::kInvalidArgument, "sampling steps must lie in [1, train_steps]");
    if (!(params.beta_start > 0.0) || !(params.beta_start <= params.beta_end) || !(params.beta_end < 1.0))
        fail(ErrorCode::kInvalidArgument, "betas must satisfy 0 < beta_start <= beta_end < 1");

    alpha_bar_.resize(static_cast<std::size_t>(n));
    const double s0 = std::sqrt(params.beta_start);
    const double s1 = std::sqrt(params.beta_end);
    double prod = 1.0;
    for (int i = 0; i < n; ++i) {
        const double root = n == 1 ? s0 : s0 + (s1 - s0) * static_cast<double>(i) / static_cast<double>(n - 1);
        prod *= 1.0 - root * root;
        alpha_bar_[static_cast<std::size_t>(i)] = prod;
    }

    timesteps_.reserve(static_cast<std::size_t>(steps));
    if (params.spacing == TimestepSpacing::kLeading) {
        const int ratio = n / steps;
        for (int k = steps - 1; k >= 0; --k) timesteps_.push_back(k * ratio);
    } else {
        const double ratio = static_cast<double>(n) / steps;
        for (int k = 0; k < steps; ++k) timesteps_.push_back(static_cast<int>(std::round(n - k * ratio)) - 1);
    }
}

DiffusionSchedule DiffusionSchedule::from_alpha_bar(std::vector<double> alpha_bar) {
    if (alpha_bar.empty()) fail(ErrorCode::kInvalidArgument, "empty alpha_bar table");
    for (std::size_t i = 0; i < alpha_bar.size(); ++i) {
        if (!(alpha_bar[i] > 0.0 && alpha_bar[i] <= 1.0)) fail(ErrorCode::kInvalidArgument, "alpha_bar outside (0, 1]");
        if (i > 0 && alpha_bar[i] > alpha_bar[i - 1]) fail(ErrorCode::kInvalidArgument, "alpha_bar must be non-increasing");
    }
    DiffusionSchedule s;
    const int n = static_cast<int>(alpha_bar.size());
    s.params_.train_steps = n;
    s.params_.sampling_steps = n;
    s.alpha_bar_ = std::move(alpha_bar);
    for (int t = n - 1; t >= 0; --t) s.timesteps_.push_back(t);
    return s;
}

DiffusionSchedule make_schedule(const ScheduleParams& params) { return DiffusionSchedule(params); }

bool DiffusionSchedule::contains(int t) const {
    return t == kBoundaryStep || std::find(timesteps_.begin(), timesteps_.end(), t) != timesteps_.end();
}

int DiffusionSchedule::previous(int t) const {
    auto it = std::find(timesteps_.begin(), timesteps_.end(), t);
    if (it == timesteps_.end()) fail(ErrorCode::kInvalidArgument, "timestep " + std::to_string(t) + " not in schedule");
    ++it;
    return it == timesteps_.end() ? kBoundaryStep : *it;
}

double DiffusionSchedule::alpha_bar(int t) const {
    if (t == kBoundaryStep) return 1.0;
    if (t < 0 || t >= params_.train_steps) fail(ErrorCode::kInvalidArgument, "timestep " + std::to_string(t) + " out of range");
    return alpha_bar_[static_cast<std::size_t>(t)];
}

namespace {

void check_step(const Tensor& z, const Tensor& eps, int hi, int lo, const DiffusionSchedule& sched) {
    if (z.shape() != eps.shape()) fail(ErrorCode::kShape, "latent and noise prediction differ in shape");
    if (!sched.contains(hi) || !sched.contains(lo))
        fail(ErrorCode::kInvalidArgument, "timestep pair (" + std::to_string(hi) + ", " + std::to_string(lo) +
                                              ") not in schedule");
    if (!(hi > lo)) fail(ErrorCode::kInvalidArgument, "DDIM step requires t > t_prev");
}

}  // namespace

Tensor ddim_denoise_step(const Tensor& z_t, const Tensor& eps_hat, int t, int t_prev,
                         const DiffusionSchedule& sched) {
    check_step(z_t, eps_hat, t, t_prev, sched);
    const double a_t = sched.alpha_bar(t);
    const double a_prev = sched.alpha_bar(t_prev);
    const double sqrt_a_t = std::sqrt(a_t);
    const double sqrt_1m_a_t = std::sqrt(1.0 - a_t);
    const double sqrt_a_prev = std::sqrt(a_prev);
    const double sqrt_1m_a_prev = std::sqrt(1.0 - a_prev);

    Tensor out(z_t.shape(), z_t.kind());
    auto z = z_t.values();
    auto e = eps_hat.values();
    auto o = out.values();
    for (std::size_t i = 0; i < o.size(); ++i) {
        const double x0 = (z[i] - sqrt_1m_a_t * e[i]) / sqrt_a_t;
        o[i] = sqrt_a_prev * x0 + sqrt_1m_a_prev * e[i];
    }
    return out;
}

Tensor ddim_invert_step(const Tensor& z_t_prev, const Tensor& eps_hat, int t_prev, int t,
                        const DiffusionSchedule& sched) {
    check_step(z_t_prev, eps_hat, t, t_prev, sched);
    const double a_t = sched.alpha_bar(t);
    const double a_prev = sched.alpha_bar(t_prev);
    const double sqrt_a_t = std::sqrt(a_t);
    const double sqrt_1m_a_t = std::sqrt(1.0 - a_t);
    const double sqrt_a_prev = std::sqrt(a_prev);
    const double sqrt_1m_a_prev = std::sqrt(1.0 - a_prev);

    Tensor out(z_t_prev.shape(), z_t_prev.kind());
    auto z = z_t_prev.values();
    auto e = eps_hat.values();
    auto o = out.values();
    for (std::size_t i = 0; i < o.size(); ++i) {
        const double x0 = (z[i] - sqrt_1m_a_prev * e[i]) / sqrt_a_prev;
        o[i] = sqrt_a_t * x0 + sqrt_1m_a_t * e[i];
    }
    return out;
}

Tensor guide(const Tensor& eps_uncond, const Tensor& eps_cond, GuidanceConfig cfg) {
    if (eps_uncond.shape() != eps_cond.shape()) fail(ErrorCode::kShape, "guidance inputs differ in shape");
    if (!(cfg.scale >= 0.0)) fail(ErrorCode::kInvalidArgument, "guidance scale must be >= 0");
    if (cfg.scale == 1.0) return eps_cond;
    if (cfg.scale == 0.0) return eps_uncond;
    Tensor out(eps_cond.shape(), eps_cond.kind());
    auto u = eps_uncond.values();
    auto c = eps_cond.values();
    auto o = out.values();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = u[i] + cfg.scale * (c[i] - u[i]);
    return out;
}

}  // namespace rave
