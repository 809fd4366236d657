// Copyright (C) 2026 The RAVE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "rave/grid_ops.hpp"
#include "rave/tensor.hpp"

namespace rave {

enum class TimestepSpacing { kLeading, kTrailing };

/// Step id of the clean-sample boundary, where alpha_bar is taken as 1.
inline constexpr int kBoundaryStep = -1;

struct ScheduleParams {
    int train_steps = 1000;
    int sampling_steps = 50;
    double beta_start = 0.00085;
    double beta_end = 0.012;
    TimestepSpacing spacing = TimestepSpacing::kLeading;

    friend bool operator==(const ScheduleParams&, const ScheduleParams&) = default;
};

/// Immutable DDIM schedule. Betas are linear in sqrt(beta) between the two
/// endpoints; alpha_bar(t) = prod_{i<=t} (1 - beta_i).
class DiffusionSchedule {
public:
    explicit DiffusionSchedule(const ScheduleParams& params);

    /// Schedule over explicit cumulative coefficients, sampling every step.
    /// Values must lie in (0, 1] and be non-increasing.
    static DiffusionSchedule from_alpha_bar(std::vector<double> alpha_bar);

    const ScheduleParams& params() const { return params_; }
    /// Sampling order, strictly decreasing.
    const std::vector<int>& timesteps() const { return timesteps_; }
    /// Step that follows `t` when denoising; kBoundaryStep after the last one.
    int previous(int t) const;
    double alpha_bar(int t) const;
    bool contains(int t) const;

private:
    DiffusionSchedule() = default;

    ScheduleParams params_;
    std::vector<double> alpha_bar_;
    std::vector<int> timesteps_;
};

DiffusionSchedule make_schedule(const ScheduleParams& params);

/// Deterministic (eta = 0) DDIM update from t to t_prev < t.
Tensor ddim_denoise_step(const Tensor& z_t, const Tensor& eps_hat, int t, int t_prev,
                         const DiffusionSchedule& sched);

/// Algebraic inverse of ddim_denoise_step for the same eps_hat: moves from
/// t_prev up to t.
Tensor ddim_invert_step(const Tensor& z_t_prev, const Tensor& eps_hat, int t_prev, int t,
                        const DiffusionSchedule& sched);

struct GuidanceConfig {
    double scale = 7.5;
};

/// eps_u + s * (eps_c - eps_u); s == 1 and s == 0 return the respective input exactly.
Tensor guide(const Tensor& eps_uncond, const Tensor& eps_cond, GuidanceConfig cfg);

/// Everything a denoiser sees for one grid.
struct PredictRequest {
    const Tensor* latent = nullptr;             // grid_height x grid_width x latent channels
    int timestep = 0;
    std::span<const double> text_embedding;
    const Tensor* condition = nullptr;          // cell-resolution condition grid, may be null
    GridLayout layout;                          // cell size in latent pixels
    int frame_width = 0;                        // cell size in image pixels
    int frame_height = 0;
};

/// Noise-prediction adapter. Output shape must equal the input latent shape
/// and be deterministic for identical inputs.
class NoisePredictor {
public:
    virtual ~NoisePredictor() = default;
    virtual std::string name() const = 0;
    virtual bool concurrent_safe() const { return false; }
    virtual Tensor predict(const PredictRequest& request) const = 0;
};

}  // namespace rave
