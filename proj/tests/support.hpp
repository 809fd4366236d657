// Copyright (C) 2026 The RAVE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "rave/video_io.hpp"

namespace rave::testing {

inline Tensor random_tensor(Shape shape, std::mt19937_64& rng, MemoryKind kind = MemoryKind::kLatent) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Tensor t(shape, kind);
    for (double& v : t.values()) v = dist(rng);
    return t;
}

inline LatentStore random_latents(std::size_t count, Shape shape, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    LatentStore store;
    for (std::size_t k = 0; k < count; ++k) store.push_back(random_tensor(shape, rng));
    return store;
}

/// A smooth blob moving `speed` pixels per frame to the right over a
/// vertical colour gradient, plus per-frame brightness flicker.
inline Video moving_blob_video(std::size_t frames, int width, int height, double speed, double flicker = 0.0) {
    std::vector<Tensor> out;
    for (std::size_t k = 0; k < frames; ++k) {
        Tensor f({height, width, 3}, MemoryKind::kPixel);
        const double cx = width * 0.3 + speed * static_cast<double>(k);
        const double cy = height * 0.5;
        const double sigma = std::min(width, height) * 0.15;
        const double shift = flicker * std::sin(1.7 * static_cast<double>(k));
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                const double blob = std::exp(-d2 / (2 * sigma * sigma));
                const double base = -0.5 + 0.6 * y / std::max(1, height - 1);
                f.at(y, x, 0) = std::clamp(base + blob + shift, -1.0, 1.0);
                f.at(y, x, 1) = std::clamp(0.5 * base + 0.4 * blob + shift, -1.0, 1.0);
                f.at(y, x, 2) = std::clamp(-base - 0.3 * blob + shift, -1.0, 1.0);
            }
        out.push_back(std::move(f));
    }
    return Video(std::move(out));
}

inline Video random_video(std::size_t frames, int width, int height, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Tensor> out;
    for (std::size_t k = 0; k < frames; ++k) out.push_back(random_tensor({height, width, 3}, rng, MemoryKind::kPixel));
    return Video(std::move(out));
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
    return m;
}

/// Mean over element positions of the standard deviation across frames.
inline double across_frame_std(const std::vector<Tensor>& frames) {
    const std::size_t n = frames.front().size();
    const double k = static_cast<double>(frames.size());
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0, s2 = 0.0;
        for (const auto& f : frames) {
            s += f.values()[i];
            s2 += f.values()[i] * f.values()[i];
        }
        const double mean = s / k;
        total += std::sqrt(std::max(0.0, s2 / k - mean * mean));
    }
    return total / static_cast<double>(n);
}

}  // namespace rave::testing
