// Copyright (C) 2026 The RAVE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rave/tensor.hpp"
#include "rave/video_io.hpp"

namespace rave {

/// Image/text embedding adapter. Outputs have a fixed dimension and unit L2 norm.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::string name() const = 0;
    virtual std::vector<double> embed_image(const Tensor& frame) const = 0;
    virtual std::vector<double> embed_text(const std::string& text) const = 0;
};

/// Image: 8x8 average-pooled luminance (rescaled to [0,1]), normalized; a
/// black frame maps to the uniform direction. Text: hashed character
/// histogram, normalized.
class ToyEmbedder final : public EmbeddingProvider {
public:
    std::string name() const override { return "toy"; }
    std::vector<double> embed_image(const Tensor& frame) const override;
    std::vector<double> embed_text(const std::string& text) const override;
};

/// Optical flow adapter: (dx, dy) per pixel, in pixels, such that a point at
/// x in `from` appears at x + flow(x) in `to`. Returns an H x W x 2 tensor.
class FlowProvider {
public:
    virtual ~FlowProvider() = default;
    virtual std::string name() const = 0;
    virtual Tensor flow(const Tensor& from, const Tensor& to) const = 0;
};

/// Same displacement everywhere; ConstantFlow(0, 0) is the zero field.
class ConstantFlow final : public FlowProvider {
public:
    ConstantFlow(double dx, double dy) : dx_(dx), dy_(dy) {}
    std::string name() const override;
    Tensor flow(const Tensor& from, const Tensor& to) const override;

private:
    double dx_;
    double dy_;
};

/// Integer block matching on luminance: each block x block tile takes the
/// displacement within +-radius minimizing the sum of absolute differences.
class BlockMatchFlow final : public FlowProvider {
public:
    explicit BlockMatchFlow(int block = 8, int radius = 4) : block_(block), radius_(radius) {}
    std::string name() const override;
    Tensor flow(const Tensor& from, const Tensor& to) const override;

private:
    int block_;
    int radius_;
};

/// "zero", "block-match" or "constant:<dx>,<dy>".
std::unique_ptr<FlowProvider> make_flow_provider(const std::string& name);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Mean cosine similarity over all K(K-1)/2 unordered frame pairs.
double clip_f(std::span<const Tensor> frames, const EmbeddingProvider& emb);
/// Mean cosine similarity between the prompt and each frame.
double clip_t(const std::string& prompt, std::span<const Tensor> frames, const EmbeddingProvider& emb);

/// Same statistic on precomputed embeddings.
double mean_pairwise_cosine(std::span<const std::vector<double>> embeddings);

/// Mean SSIM on channel-mean luminance: 11x11 Gaussian window (sigma 1.5)
/// truncated and renormalized at the borders, C1 = (0.01 L)^2,
/// C2 = (0.03 L)^2 with L = 2 for [-1, 1] data.
double ssim(const Tensor& a, const Tensor& b);

inline constexpr double kSsimRange = 2.0;

/// Backward warp: out(x) = frame(x + flow(x)), bilinear, edge-replicated.
Tensor warp(const Tensor& frame, const Tensor& flow);

/// Flows come from source pairs (i, i+1); each term is
/// ssim(warp(edited[i+1], flow_i), edited[i]). `per_pair` receives the terms.
double warp_ssim(const Video& edited, const Video& source, const FlowProvider& flow,
                 std::vector<double>* per_pair = nullptr);

inline double q_edit(double warp_ssim_value, double clip_t_value) { return warp_ssim_value * clip_t_value; }

struct MetricsReport {
    double clip_f = 0;
    double clip_t = 0;
    double warp_ssim = 0;
    double q_edit = 0;
    std::vector<double> warp_ssim_pairs;
    std::vector<double> clip_t_frames;
    std::string embedder;
    std::string flow;
};

MetricsReport evaluate(const Video& source, const Video& edited, const std::string& prompt,
                       const EmbeddingProvider& emb, const FlowProvider& flow);

std::string report_to_json(const MetricsReport& report, int indent = 2);
/// "CLIP-F | WarpSSIM | CLIP-T | Q_edit" scaled by 100.
std::string report_table_row(const MetricsReport& report, const std::string& label);

}  // namespace rave
