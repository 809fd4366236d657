// Copyright (C) 2026 The RAVE Authors
// SPDX-License-Identifier: Apache-2.0

#include "rave/video_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include "rave/error.hpp"

namespace fs = std::filesystem;

namespace rave {

Video::Video(std::vector<Tensor> frames) : frames_(std::move(frames)) {
    if (frames_.empty()) fail(ErrorCode::kShape, "video has no frames");
    const Shape s = frames_.front().shape();
    for (std::size_t k = 1; k < frames_.size(); ++k) {
        if (frames_[k].shape() != s)
            fail(ErrorCode::kShape, "frame " + std::to_string(k) + " differs in shape from frame 0");
    }
}

LatentStore::LatentStore(std::vector<Tensor> latents) : latents_(std::move(latents)) {
    for (std::size_t k = 1; k < latents_.size(); ++k) {
        if (latents_[k].shape() != latents_.front().shape())
            fail(ErrorCode::kShape, "latent " + std::to_string(k) + " differs in shape from latent 0");
    }
}

void LatentStore::push_back(Tensor t) {
    if (!latents_.empty() && t.shape() != latents_.front().shape())
        fail(ErrorCode::kShape, "latent shape mismatch on push_back");
    latents_.push_back(std::move(t));
}

void LatentStore::truncate(std::size_t count) {
    if (count < latents_.size()) latents_.erase(latents_.begin() + static_cast<std::ptrdiff_t>(count), latents_.end());
}

// Codecs

Tensor IdentityCodec::encode_frame(const Tensor& frame) const {
    Tensor out(frame.shape(), MemoryKind::kLatent);
    std::copy(frame.values().begin(), frame.values().end(), out.values().begin());
    return out;
}

Tensor IdentityCodec::decode_latent(const Tensor& latent) const {
    Tensor out(latent.shape(), MemoryKind::kPixel);
    std::copy(latent.values().begin(), latent.values().end(), out.values().begin());
    return out;
}

BlockAverageCodec::BlockAverageCodec(int factor) : factor_(factor) {
    if (factor < 1) fail(ErrorCode::kInvalidArgument, "block-average factor must be >= 1");
}

std::string BlockAverageCodec::name() const { return "block-average:" + std::to_string(factor_); }

Tensor BlockAverageCodec::encode_frame(const Tensor& frame) const {
    check_divisible({frame.width(), frame.height()}, factor_);
    const int h = frame.height() / factor_;
    const int w = frame.width() / factor_;
    const double inv_area = 1.0 / static_cast<double>(factor_ * factor_);
    Tensor out({h, w, frame.channels()}, MemoryKind::kLatent);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < frame.channels(); ++c) {
                double sum = 0.0;
                for (int dy = 0; dy < factor_; ++dy)
                    for (int dx = 0; dx < factor_; ++dx) sum += frame.at(y * factor_ + dy, x * factor_ + dx, c);
                out.at(y, x, c) = sum * inv_area;
            }
    return out;
}

Tensor BlockAverageCodec::decode_latent(const Tensor& latent) const {
    Tensor out({latent.height() * factor_, latent.width() * factor_, latent.channels()}, MemoryKind::kPixel);
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x)
            for (int c = 0; c < out.channels(); ++c) out.at(y, x, c) = latent.at(y / factor_, x / factor_, c);
    return out;
}

std::unique_ptr<LatentCodec> make_codec(const std::string& name) {
    if (name == "identity") return std::make_unique<IdentityCodec>();
    const std::string prefix = "block-average:";
    if (name.rfind(prefix, 0) == 0) {
        try {
            return std::make_unique<BlockAverageCodec>(std::stoi(name.substr(prefix.size())));
        } catch (const std::logic_error&) {
        }
    }
    fail(ErrorCode::kInvalidArgument, "unknown codec '" + name + "'");
}

void check_divisible(Resolution res, int scale_factor) {
    if (scale_factor < 1 || res.width % scale_factor != 0 || res.height % scale_factor != 0)
        fail(ErrorCode::kShape, "scale factor " + std::to_string(scale_factor) + " does not divide " +
                                    std::to_string(res.width) + "x" + std::to_string(res.height));
}

LatentStore encode(const Video& video, const LatentCodec& codec) {
    check_divisible(video.resolution(), codec.spec().scale_factor);
    std::vector<Tensor> latents;
    latents.reserve(video.frame_count());
    for (const auto& frame : video.frames()) latents.push_back(codec.encode_frame(frame));
    return LatentStore(std::move(latents));
}

Video decode(const LatentStore& latents, const LatentCodec& codec) {
    if (latents.empty()) fail(ErrorCode::kShape, "no latents to decode");
    if (latents.latent_shape().channels != codec.spec().latent_channels)
        fail(ErrorCode::kShape, "latent channels do not match codec");
    std::vector<Tensor> frames;
    frames.reserve(latents.size());
    for (const auto& z : latents.latents()) frames.push_back(codec.decode_latent(z));
    return Video(std::move(frames));
}

// PNG

std::uint8_t quantize_unit(double v) {
    const double q = std::round((std::clamp(v, -1.0, 1.0) + 1.0) * 127.5);
    return static_cast<std::uint8_t>(q);
}

double dequantize_unit(std::uint8_t q) { return static_cast<double>(q) / 127.5 - 1.0; }

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

Tensor read_png(const fs::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str()))
        fail(ErrorCode::kIo, "cannot decode " + path.string() + ": " + image.message);
    const bool gray = (image.format & PNG_FORMAT_FLAG_COLOR) == 0;
    image.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    const int channels = gray ? 1 : 3;
    std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
        png_image_free(&image);
        fail(ErrorCode::kIo, "cannot decode " + path.string() + ": " + image.message);
    }
    Tensor out({static_cast<int>(image.height), static_cast<int>(image.width), channels}, MemoryKind::kPixel);
    auto values = out.values();
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = dequantize_unit(buffer[i]);
    return out;
}

void write_png(const Tensor& image, const fs::path& path) {
    if (image.channels() != 1 && image.channels() != 3)
        fail(ErrorCode::kShape, "write_png supports 1 or 3 channels");
    std::vector<png_byte> buffer(image.size());
    auto values = image.values();
    for (std::size_t i = 0; i < values.size(); ++i) buffer[i] = quantize_unit(values[i]);
    png_image out{};
    out.version = PNG_IMAGE_VERSION;
    out.width = static_cast<png_uint_32>(image.width());
    out.height = static_cast<png_uint_32>(image.height());
    out.format = image.channels() == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&out, path.c_str(), 0, buffer.data(), 0, nullptr))
        fail(ErrorCode::kIo, "cannot write " + path.string() + ": " + out.message);
}

Tensor resize_bilinear(const Tensor& image, Resolution target) {
    if (target.width < 1 || target.height < 1) fail(ErrorCode::kInvalidArgument, "invalid target resolution");
    if (target.width == image.width() && target.height == image.height()) return image;
    Tensor out({target.height, target.width, image.channels()}, image.kind());
    const double sy = static_cast<double>(image.height()) / target.height;
    const double sx = static_cast<double>(image.width()) / target.width;
    for (int y = 0; y < target.height; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(image.height() - 1));
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, image.height() - 1);
        const double wy = fy - y0;
        for (int x = 0; x < target.width; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(image.width() - 1));
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, image.width() - 1);
            const double wx = fx - x0;
            for (int c = 0; c < image.channels(); ++c) {
                const double top = image.at(y0, x0, c) * (1 - wx) + image.at(y0, x1, c) * wx;
                const double bottom = image.at(y1, x0, c) * (1 - wx) + image.at(y1, x1, c) * wx;
                out.at(y, x, c) = top * (1 - wy) + bottom * wy;
            }
        }
    }
    return out;
}

std::string frame_file_name(std::size_t index) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%04zu.png", index);
    return name;
}

Video load_frames(const fs::path& dir, std::optional<Resolution> target) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) fail(ErrorCode::kIo, "no such frame directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        auto ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (ext == ".png") files.push_back(entry.path());
    }
    if (files.empty()) fail(ErrorCode::kIo, "no PNG frames in " + dir.string());
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });

    std::vector<Tensor> frames;
    frames.reserve(files.size());
    for (const auto& file : files) {
        Tensor img = read_png(file);
        if (img.channels() == 1) {
            Tensor rgb({img.height(), img.width(), 3}, MemoryKind::kPixel);
            for (int y = 0; y < img.height(); ++y)
                for (int x = 0; x < img.width(); ++x)
                    for (int c = 0; c < 3; ++c) rgb.at(y, x, c) = img.at(y, x, 0);
            img = std::move(rgb);
        }
        if (target) {
            img = resize_bilinear(img, *target);
        } else if (!frames.empty() && img.shape() != frames.front().shape()) {
            fail(ErrorCode::kShape, "inconsistent source resolution at " + file.filename().string() +
                                        "; pass a target resolution");
        }
        frames.push_back(std::move(img));
    }
    return Video(std::move(frames));
}

void save_frames(const Video& video, const fs::path& dir) {
    if (video.empty()) fail(ErrorCode::kInvalidArgument, "cannot save an empty video");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir)) fail(ErrorCode::kIo, "cannot create directory " + dir.string());
    for (std::size_t k = 0; k < video.frame_count(); ++k) write_png(video.frame(k), dir / frame_file_name(k));
}

}  // namespace rave
