// Copyright (C) 2026 The RAVE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rave/tensor.hpp"

namespace rave {

struct Resolution {
    int width = 0;
    int height = 0;
    friend bool operator==(const Resolution&, const Resolution&) = default;
};

/// Ordered RGB frames sharing one resolution. Pixel values are normalized
/// to [-1, 1] on load.
class Video {
public:
    Video() = default;
    /// Throws kShape if frames is empty or the frames disagree in shape.
    explicit Video(std::vector<Tensor> frames);

    std::size_t frame_count() const { return frames_.size(); }
    int width() const { return frames_.empty() ? 0 : frames_.front().width(); }
    int height() const { return frames_.empty() ? 0 : frames_.front().height(); }
    int channels() const { return frames_.empty() ? 0 : frames_.front().channels(); }
    Resolution resolution() const { return {width(), height()}; }
    bool empty() const { return frames_.empty(); }

    const Tensor& frame(std::size_t k) const { return frames_.at(k); }
    const std::vector<Tensor>& frames() const { return frames_; }

    friend bool operator==(const Video&, const Video&) = default;

private:
    std::vector<Tensor> frames_;
};

/// Per-frame latents keyed by position: entry k belongs to frame k.
class LatentStore {
public:
    LatentStore() = default;
    explicit LatentStore(std::vector<Tensor> latents);

    std::size_t size() const { return latents_.size(); }
    bool empty() const { return latents_.empty(); }
    Shape latent_shape() const { return latents_.empty() ? Shape{} : latents_.front().shape(); }

    Tensor& operator[](std::size_t k) { return latents_[k]; }
    const Tensor& operator[](std::size_t k) const { return latents_[k]; }
    const std::vector<Tensor>& latents() const { return latents_; }

    void push_back(Tensor t);
    void truncate(std::size_t count);

    friend bool operator==(const LatentStore&, const LatentStore&) = default;

private:
    std::vector<Tensor> latents_;
};

struct LatentCodecSpec {
    int scale_factor = 1;
    int latent_channels = 3;
};

/// Pixel <-> latent adapter. Implementations report whether concurrent
/// encode/decode calls on one instance are allowed.
class LatentCodec {
public:
    virtual ~LatentCodec() = default;
    virtual LatentCodecSpec spec() const = 0;
    virtual std::string name() const = 0;
    virtual bool concurrent_safe() const { return false; }
    virtual Tensor encode_frame(const Tensor& frame) const = 0;
    virtual Tensor decode_latent(const Tensor& latent) const = 0;
};

/// f = 1, latent == pixels.
class IdentityCodec final : public LatentCodec {
public:
    LatentCodecSpec spec() const override { return {1, 3}; }
    std::string name() const override { return "identity"; }
    bool concurrent_safe() const override { return true; }
    Tensor encode_frame(const Tensor& frame) const override;
    Tensor decode_latent(const Tensor& latent) const override;
};

/// Averages f x f pixel blocks on encode; nearest-neighbour upsampling on decode.
class BlockAverageCodec final : public LatentCodec {
public:
    explicit BlockAverageCodec(int factor);
    LatentCodecSpec spec() const override { return {factor_, 3}; }
    std::string name() const override;
    bool concurrent_safe() const override { return true; }
    Tensor encode_frame(const Tensor& frame) const override;
    Tensor decode_latent(const Tensor& latent) const override;

private:
    int factor_;
};

/// Builds a codec from its name(): "identity" or "block-average:<f>".
std::unique_ptr<LatentCodec> make_codec(const std::string& name);

// Frame files.

/// Reads every *.png in `dir` in lexicographic order. With a target
/// resolution each frame is bilinearly resized; without one all sources
/// must share a resolution.
Video load_frames(const std::filesystem::path& dir, std::optional<Resolution> target = std::nullopt);

/// Writes frame_0000.png, frame_0001.png, ... (8-bit RGB, values clamped).
void save_frames(const Video& video, const std::filesystem::path& dir);

std::string frame_file_name(std::size_t index);

/// Single-image PNG helpers. read_png returns [-1,1] values with the file's
/// channel count (gray -> 1, otherwise 3). write_png accepts 1 or 3 channels.
Tensor read_png(const std::filesystem::path& path);
void write_png(const Tensor& image, const std::filesystem::path& path);

std::uint8_t quantize_unit(double v);   // [-1,1] -> 0..255
double dequantize_unit(std::uint8_t q); // 0..255 -> [-1,1]

Tensor resize_bilinear(const Tensor& image, Resolution target);

// Latent space.

LatentStore encode(const Video& video, const LatentCodec& codec);
Video decode(const LatentStore& latents, const LatentCodec& codec);

/// Throws kShape unless f divides both dimensions.
void check_divisible(Resolution res, int scale_factor);

}  // namespace rave
