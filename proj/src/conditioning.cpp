// Copyright (C) 2026 The RAVE Authors
// SPDX-License-Identifier: Apache-2.0

#include "rave/conditioning.hpp"

#include <algorithm>
#include <cmath>

#include "rave/error.hpp"

namespace fs = std::filesystem;

namespace rave {

std::string to_string(ConditionKind kind) {
    switch (kind) {
        case ConditionKind::kDepth: return "depth";
        case ConditionKind::kLineart: return "lineart";
        case ConditionKind::kSoftedge: return "softedge";
        case ConditionKind::kToyEdge: return "toy-edge";
    }
    return "unknown";
}

ConditionKind parse_condition_kind(const std::string& name) {
    if (name == "depth") return ConditionKind::kDepth;
    if (name == "lineart") return ConditionKind::kLineart;
    if (name == "softedge") return ConditionKind::kSoftedge;
    if (name == "toy-edge" || name == "toy_edge") return ConditionKind::kToyEdge;
    fail(ErrorCode::kInvalidArgument, "unknown condition kind '" + name + "'");
}

ConditionMap ToyEdgeExtractor::extract(const Tensor& frame) const {
    const int h = frame.height();
    const int w = frame.width();
    std::vector<double> luma(static_cast<std::size_t>(h) * static_cast<std::size_t>(w));
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double sum = 0.0;
            for (int c = 0; c < frame.channels(); ++c) sum += frame.at(y, x, c);
            luma[static_cast<std::size_t>(y * w + x)] = sum / frame.channels();
        }
    auto px = [&](int y, int x) {
        y = std::clamp(y, 0, h - 1);
        x = std::clamp(x, 0, w - 1);
        return luma[static_cast<std::size_t>(y * w + x)];
    };
    const double norm = 8.0 * std::sqrt(2.0);
    ConditionMap map{Tensor({h, w, 1}, MemoryKind::kCondition), ConditionKind::kToyEdge};
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double gx = (px(y - 1, x + 1) + 2 * px(y, x + 1) + px(y + 1, x + 1)) -
                              (px(y - 1, x - 1) + 2 * px(y, x - 1) + px(y + 1, x - 1));
            const double gy = (px(y + 1, x - 1) + 2 * px(y + 1, x) + px(y + 1, x + 1)) -
                              (px(y - 1, x - 1) + 2 * px(y - 1, x) + px(y - 1, x + 1));
            map.values.at(y, x, 0) = std::min(1.0, std::sqrt(gx * gx + gy * gy) / norm);
        }
    return map;
}

std::vector<ConditionMap> extract_conditions(const Video& video, const ConditionExtractor& extractor) {
    std::vector<ConditionMap> maps;
    maps.reserve(video.frame_count());
    for (std::size_t k = 0; k < video.frame_count(); ++k) {
        try {
            maps.push_back(extractor.extract(video.frame(k)));
        } catch (const std::exception& e) {
            fail(ErrorCode::kAdapter, "condition extraction failed on frame " + std::to_string(k) + ": " + e.what());
        }
        const Tensor& v = maps.back().values;
        if (v.shape() != maps.front().values.shape())
            fail(ErrorCode::kAdapter, "condition map of frame " + std::to_string(k) + " changes dimensions");
    }
    return maps;
}

Tensor downscale_condition(const Tensor& map, int cell_width, int cell_height) {
    if (cell_width < 1 || cell_height < 1 || map.width() % cell_width != 0 || map.height() % cell_height != 0)
        fail(ErrorCode::kShape, "condition map " + std::to_string(map.width()) + "x" + std::to_string(map.height()) +
                                    " is not an integer multiple of cell " + std::to_string(cell_width) + "x" +
                                    std::to_string(cell_height));
    const int fx = map.width() / cell_width;
    const int fy = map.height() / cell_height;
    Tensor out({cell_height, cell_width, map.channels()}, MemoryKind::kCondition);
    if (fx == 1 && fy == 1) {
        std::copy(map.values().begin(), map.values().end(), out.values().begin());
        return out;
    }
    const double inv = 1.0 / static_cast<double>(fx * fy);
    for (int y = 0; y < cell_height; ++y)
        for (int x = 0; x < cell_width; ++x)
            for (int c = 0; c < map.channels(); ++c) {
                double sum = 0.0;
                for (int dy = 0; dy < fy; ++dy)
                    for (int dx = 0; dx < fx; ++dx) sum += map.at(y * fy + dy, x * fx + dx, c);
                out.at(y, x, c) = sum * inv;
            }
    return out;
}

LatentStore condition_cells(std::span<const ConditionMap> maps, const GridLayout& layout) {
    std::vector<Tensor> cells;
    cells.reserve(maps.size());
    for (const auto& m : maps) cells.push_back(downscale_condition(m.values, layout.cell_width, layout.cell_height));
    return LatentStore(std::move(cells));
}

GridBatch conditions_to_grids(std::span<const ConditionMap> maps, const GridLayout& layout,
                              std::span<const std::size_t> order) {
    if (maps.empty()) fail(ErrorCode::kInvalidArgument, "no condition maps");
    const auto n = static_cast<std::size_t>(layout.cells());
    if (order.size() < maps.size() || order.size() % n != 0 || order.size() - maps.size() >= n)
        fail(ErrorCode::kInvalidArgument, "order length " + std::to_string(order.size()) + " does not match " +
                                              std::to_string(maps.size()) + " condition maps");
    const LatentStore cells = condition_cells(maps, layout);
    GridBatch batch;
    batch.layout = layout;
    batch.frame_count = maps.size();
    if (!is_bijection(order)) fail(ErrorCode::kInvalidArgument, "condition order is not a bijection");
    for (std::size_t start = 0; start < order.size(); start += n) {
        auto slots = order.subspan(start, n);
        batch.grids.push_back(assemble_grid(cells, layout, slots, MemoryKind::kCondition));
        batch.assignment.emplace_back(slots.begin(), slots.end());
    }
    return batch;
}

void quantize_condition(ConditionMap& map) {
    for (double& v : map.values.values()) v = (dequantize_unit(quantize_unit(v * 2.0 - 1.0)) + 1.0) / 2.0;
}

fs::path condition_cache_dir(const fs::path& video_dir, ConditionKind kind) {
    return video_dir / ("cond_" + to_string(kind));
}

std::vector<ConditionMap> load_or_extract_conditions(const fs::path& video_dir, const Video& video,
                                                     ConditionKind kind, const ConditionExtractor* extractor) {
    const fs::path cache = condition_cache_dir(video_dir, kind);
    std::error_code ec;
    if (fs::is_directory(cache, ec)) {
        std::vector<ConditionMap> maps;
        bool complete = true;
        for (std::size_t k = 0; k < video.frame_count() && complete; ++k) {
            const fs::path file = cache / frame_file_name(k);
            if (!fs::exists(file)) {
                complete = false;
                break;
            }
            Tensor img = read_png(file);
            if (img.width() != video.width() || img.height() != video.height())
                fail(ErrorCode::kShape, "cached condition map " + file.string() + " does not match the frame size");
            ConditionMap m{Tensor({img.height(), img.width(), 1}, MemoryKind::kCondition), kind};
            for (int y = 0; y < img.height(); ++y)
                for (int x = 0; x < img.width(); ++x) m.values.at(y, x, 0) = (img.at(y, x, 0) + 1.0) / 2.0;
            maps.push_back(std::move(m));
        }
        if (complete && !fs::exists(cache / frame_file_name(video.frame_count()))) return maps;
    }
    if (extractor == nullptr || extractor->kind() != kind)
        fail(ErrorCode::kUnavailable, "no built-in extractor for '" + to_string(kind) + "'; provide maps in " +
                                          cache.string());
    std::vector<ConditionMap> maps = extract_conditions(video, *extractor);
    fs::create_directories(cache, ec);
    for (std::size_t k = 0; k < maps.size(); ++k) {
        quantize_condition(maps[k]);
        Tensor img(maps[k].values.shape(), MemoryKind::kOther);
        auto src = maps[k].values.values();
        auto dst = img.values();
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] * 2.0 - 1.0;
        write_png(img, cache / frame_file_name(k));
    }
    return maps;
}

}  // namespace rave
