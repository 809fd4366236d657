// Copyright (C) 2026 The RAVE Authors
// SPDX-License-Identifier: Apache-2.0

#include "rave/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

#include <json.hpp>

#include "rave/error.hpp"
#include "rave/toy_adapters.hpp"

namespace rave {
namespace {

std::vector<double> luminance(const Tensor& frame) {
    std::vector<double> out(static_cast<std::size_t>(frame.height()) * static_cast<std::size_t>(frame.width()));
    for (int y = 0; y < frame.height(); ++y)
        for (int x = 0; x < frame.width(); ++x) {
            double sum = 0.0;
            for (int c = 0; c < frame.channels(); ++c) sum += frame.at(y, x, c);
            out[static_cast<std::size_t>(y * frame.width() + x)] = sum / frame.channels();
        }
    return out;
}

void normalize(std::vector<double>& v) {
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
}

}  // namespace

std::vector<double> ToyEmbedder::embed_image(const Tensor& frame) const {
    constexpr int kBins = 8;
    std::vector<double> sum(kBins * kBins, 0.0), count(kBins * kBins, 0.0);
    const auto luma = luminance(frame);
    for (int y = 0; y < frame.height(); ++y)
        for (int x = 0; x < frame.width(); ++x) {
            const int by = y * kBins / frame.height();
            const int bx = x * kBins / frame.width();
            sum[static_cast<std::size_t>(by * kBins + bx)] += (luma[static_cast<std::size_t>(y * frame.width() + x)] + 1.0) / 2.0;
            count[static_cast<std::size_t>(by * kBins + bx)] += 1.0;
        }
    double norm = 0.0;
    for (std::size_t i = 0; i < sum.size(); ++i) {
        if (count[i] > 0) sum[i] /= count[i];
        norm += sum[i] * sum[i];
    }
    if (norm == 0.0) std::fill(sum.begin(), sum.end(), 1.0);
    normalize(sum);
    return sum;
}

std::vector<double> ToyEmbedder::embed_text(const std::string& text) const {
    if (text.empty()) fail(ErrorCode::kInvalidArgument, "cannot embed an empty prompt");
    return toy_text_histogram(text);
}

std::string ConstantFlow::name() const {
    if (dx_ == 0.0 && dy_ == 0.0) return "zero";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "constant:%.17g,%.17g", dx_, dy_);
    return buf;
}

Tensor ConstantFlow::flow(const Tensor& from, const Tensor& to) const {
    if (from.shape() != to.shape()) fail(ErrorCode::kShape, "flow inputs differ in shape");
    Tensor f({from.height(), from.width(), 2}, MemoryKind::kOther);
    for (int y = 0; y < f.height(); ++y)
        for (int x = 0; x < f.width(); ++x) {
            f.at(y, x, 0) = dx_;
            f.at(y, x, 1) = dy_;
        }
    return f;
}

std::string BlockMatchFlow::name() const {
    return "block-match:" + std::to_string(block_) + "," + std::to_string(radius_);
}

Tensor BlockMatchFlow::flow(const Tensor& from, const Tensor& to) const {
    if (from.shape() != to.shape()) fail(ErrorCode::kShape, "flow inputs differ in shape");
    const int h = from.height();
    const int w = from.width();
    const auto a = luminance(from);
    const auto b = luminance(to);
    Tensor f({h, w, 2}, MemoryKind::kOther);
    for (int by = 0; by < h; by += block_)
        for (int bx = 0; bx < w; bx += block_) {
            const int ey = std::min(by + block_, h);
            const int ex = std::min(bx + block_, w);
            double best = std::numeric_limits<double>::infinity();
            int best_dx = 0, best_dy = 0;
            // Search outward so ties prefer the smallest displacement.
            for (int ring = 0; ring <= radius_; ++ring)
                for (int dy = -ring; dy <= ring; ++dy)
                    for (int dx = -ring; dx <= ring; ++dx) {
                        if (std::max(std::abs(dx), std::abs(dy)) != ring) continue;
                        double sad = 0.0;
                        for (int y = by; y < ey; ++y)
                            for (int x = bx; x < ex; ++x) {
                                const int ty = std::clamp(y + dy, 0, h - 1);
                                const int tx = std::clamp(x + dx, 0, w - 1);
                                sad += std::abs(a[static_cast<std::size_t>(y * w + x)] - b[static_cast<std::size_t>(ty * w + tx)]);
                            }
                        if (sad < best) {
                            best = sad;
                            best_dx = dx;
                            best_dy = dy;
                        }
                    }
            for (int y = by; y < ey; ++y)
                for (int x = bx; x < ex; ++x) {
                    f.at(y, x, 0) = best_dx;
                    f.at(y, x, 1) = best_dy;
                }
        }
    return f;
}

std::unique_ptr<FlowProvider> make_flow_provider(const std::string& name) {
    if (name == "zero") return std::make_unique<ConstantFlow>(0.0, 0.0);
    if (name == "block-match") return std::make_unique<BlockMatchFlow>();
    if (name.rfind("block-match:", 0) == 0) {
        int block = 0, radius = 0;
        if (std::sscanf(name.c_str() + 12, "%d,%d", &block, &radius) == 2 && block > 0 && radius >= 0)
            return std::make_unique<BlockMatchFlow>(block, radius);
    }
    if (name.rfind("constant:", 0) == 0) {
        double dx = 0, dy = 0;
        if (std::sscanf(name.c_str() + 9, "%lf,%lf", &dx, &dy) == 2) return std::make_unique<ConstantFlow>(dx, dy);
    }
    fail(ErrorCode::kInvalidArgument, "unknown flow provider '" + name + "'");
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) fail(ErrorCode::kShape, "embedding dimensions differ");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) fail(ErrorCode::kInvalidArgument, "cosine of a zero vector");
    return dot / std::sqrt(na * nb);
}

double mean_pairwise_cosine(std::span<const std::vector<double>> embeddings) {
    if (embeddings.size() < 2) fail(ErrorCode::kInvalidArgument, "CLIP-F needs at least two frames");
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < embeddings.size(); ++i)
        for (std::size_t j = i + 1; j < embeddings.size(); ++j) {
            sum += cosine_similarity(embeddings[i], embeddings[j]);
            ++pairs;
        }
    return sum / static_cast<double>(pairs);
}

double clip_f(std::span<const Tensor> frames, const EmbeddingProvider& emb) {
    if (frames.size() < 2) fail(ErrorCode::kInvalidArgument, "CLIP-F needs at least two frames");
    std::vector<std::vector<double>> e;
    e.reserve(frames.size());
    for (const auto& f : frames) e.push_back(emb.embed_image(f));
    return mean_pairwise_cosine(e);
}

double clip_t(const std::string& prompt, std::span<const Tensor> frames, const EmbeddingProvider& emb) {
    if (prompt.empty()) fail(ErrorCode::kInvalidArgument, "CLIP-T needs a prompt");
    if (frames.empty()) fail(ErrorCode::kInvalidArgument, "CLIP-T needs at least one frame");
    const auto text = emb.embed_text(prompt);
    double sum = 0.0;
    for (const auto& f : frames) sum += cosine_similarity(text, emb.embed_image(f));
    return sum / static_cast<double>(frames.size());
}

namespace {

constexpr int kSsimRadius = 5;
constexpr double kSsimSigma = 1.5;

/// Separable Gaussian blur; each tap set is renormalized over in-bounds pixels.
std::vector<double> gaussian_blur(const std::vector<double>& img, int h, int w) {
    double kernel[2 * kSsimRadius + 1];
    for (int i = -kSsimRadius; i <= kSsimRadius; ++i)
        kernel[i + kSsimRadius] = std::exp(-(i * i) / (2.0 * kSsimSigma * kSsimSigma));
    std::vector<double> tmp(img.size()), out(img.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0, wsum = 0.0;
            for (int i = std::max(-kSsimRadius, -x); i <= std::min(kSsimRadius, w - 1 - x); ++i) {
                acc += kernel[i + kSsimRadius] * img[static_cast<std::size_t>(y * w + x + i)];
                wsum += kernel[i + kSsimRadius];
            }
            tmp[static_cast<std::size_t>(y * w + x)] = acc / wsum;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0, wsum = 0.0;
            for (int i = std::max(-kSsimRadius, -y); i <= std::min(kSsimRadius, h - 1 - y); ++i) {
                acc += kernel[i + kSsimRadius] * tmp[static_cast<std::size_t>((y + i) * w + x)];
                wsum += kernel[i + kSsimRadius];
            }
            out[static_cast<std::size_t>(y * w + x)] = acc / wsum;
        }
    return out;
}

}  // namespace

double ssim(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) fail(ErrorCode::kShape, "SSIM inputs differ in shape");
    const int h = a.height();
    const int w = a.width();
    const auto x = luminance(a);
    const auto y = luminance(b);
    std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        xx[i] = x[i] * x[i];
        yy[i] = y[i] * y[i];
        xy[i] = x[i] * y[i];
    }
    const auto mu_x = gaussian_blur(x, h, w);
    const auto mu_y = gaussian_blur(y, h, w);
    const auto e_xx = gaussian_blur(xx, h, w);
    const auto e_yy = gaussian_blur(yy, h, w);
    const auto e_xy = gaussian_blur(xy, h, w);
    const double c1 = (0.01 * kSsimRange) * (0.01 * kSsimRange);
    const double c2 = (0.03 * kSsimRange) * (0.03 * kSsimRange);
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double var_x = e_xx[i] - mu_x[i] * mu_x[i];
        const double var_y = e_yy[i] - mu_y[i] * mu_y[i];
        const double cov = e_xy[i] - mu_x[i] * mu_y[i];
        const double num = (2.0 * mu_x[i] * mu_y[i] + c1) * (2.0 * cov + c2);
        const double den = (mu_x[i] * mu_x[i] + mu_y[i] * mu_y[i] + c1) * (var_x + var_y + c2);
        total += num / den;
    }
    return total / static_cast<double>(x.size());
}

Tensor warp(const Tensor& frame, const Tensor& flow) {
    if (flow.height() != frame.height() || flow.width() != frame.width() || flow.channels() != 2)
        fail(ErrorCode::kShape, "flow field does not match the frame");
    const int h = frame.height();
    const int w = frame.width();
    Tensor out(frame.shape(), frame.kind());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double sx = std::clamp(x + flow.at(y, x, 0), 0.0, static_cast<double>(w - 1));
            const double sy = std::clamp(y + flow.at(y, x, 1), 0.0, static_cast<double>(h - 1));
            const int x0 = static_cast<int>(std::floor(sx));
            const int y0 = static_cast<int>(std::floor(sy));
            const int x1 = std::min(x0 + 1, w - 1);
            const int y1 = std::min(y0 + 1, h - 1);
            const double wx = sx - x0;
            const double wy = sy - y0;
            for (int c = 0; c < frame.channels(); ++c) {
                double v = frame.at(y0, x0, c);
                if (wx != 0.0) v = v * (1.0 - wx) + frame.at(y0, x1, c) * wx;
                if (wy != 0.0) {
                    double below = frame.at(y1, x0, c);
                    if (wx != 0.0) below = below * (1.0 - wx) + frame.at(y1, x1, c) * wx;
                    v = v * (1.0 - wy) + below * wy;
                }
                out.at(y, x, c) = v;
            }
        }
    return out;
}

double warp_ssim(const Video& edited, const Video& source, const FlowProvider& flow, std::vector<double>* per_pair) {
    if (edited.frame_count() != source.frame_count())
        fail(ErrorCode::kShape, "edited and source videos differ in length");
    if (edited.resolution() != source.resolution())
        fail(ErrorCode::kShape, "edited and source videos differ in resolution");
    if (edited.frame_count() < 2) fail(ErrorCode::kInvalidArgument, "WarpSSIM needs at least two frames");
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < source.frame_count(); ++i) {
        const Tensor f = flow.flow(source.frame(i), source.frame(i + 1));
        const double s = ssim(warp(edited.frame(i + 1), f), edited.frame(i));
        if (per_pair) per_pair->push_back(s);
        sum += s;
    }
    return sum / static_cast<double>(source.frame_count() - 1);
}

MetricsReport evaluate(const Video& source, const Video& edited, const std::string& prompt,
                       const EmbeddingProvider& emb, const FlowProvider& flow) {
    MetricsReport r;
    r.embedder = emb.name();
    r.flow = flow.name();
    if (prompt.empty()) fail(ErrorCode::kInvalidArgument, "CLIP-T needs a prompt");
    std::vector<std::vector<double>> frame_emb;
    for (const auto& f : edited.frames()) frame_emb.push_back(emb.embed_image(f));
    r.clip_f = mean_pairwise_cosine(frame_emb);
    const auto text = emb.embed_text(prompt);
    double sum = 0.0;
    for (const auto& e : frame_emb) {
        r.clip_t_frames.push_back(cosine_similarity(text, e));
        sum += r.clip_t_frames.back();
    }
    r.clip_t = sum / static_cast<double>(frame_emb.size());
    r.warp_ssim = warp_ssim(edited, source, flow, &r.warp_ssim_pairs);
    r.q_edit = q_edit(r.warp_ssim, r.clip_t);
    return r;
}

std::string report_to_json(const MetricsReport& r, int indent) {
    nlohmann::json doc = {
        {"clip_f", r.clip_f},
        {"clip_t", r.clip_t},
        {"warp_ssim", r.warp_ssim},
        {"q_edit", r.q_edit},
        {"per_pair", {{"warp_ssim", r.warp_ssim_pairs}, {"clip_t", r.clip_t_frames}}},
        {"providers", {{"embedder", r.embedder}, {"flow", r.flow}}},
    };
    return doc.dump(indent);
}

std::string report_table_row(const MetricsReport& r, const std::string& label) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "| %s | %.2f | %.2f | %.2f | %.2f |", label.c_str(), r.clip_f * 100.0,
                  r.warp_ssim * 100.0, r.clip_t * 100.0, r.q_edit * 100.0);
    return buf;
}

}  // namespace rave
