// Copyright (C) 2026 The RAVE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rave/grid_ops.hpp"
#include "rave/tensor.hpp"
#include "rave/video_io.hpp"

namespace rave {

enum class ConditionKind { kDepth, kLineart, kSoftedge, kToyEdge };

std::string to_string(ConditionKind kind);
/// Accepts "depth", "lineart", "softedge", "toy-edge" (also "toy_edge").
ConditionKind parse_condition_kind(const std::string& name);

/// Single-channel spatial map in [0, 1] at frame resolution.
struct ConditionMap {
    Tensor values;
    ConditionKind kind = ConditionKind::kToyEdge;
};

class ConditionExtractor {
public:
    virtual ~ConditionExtractor() = default;
    virtual ConditionKind kind() const = 0;
    virtual std::string name() const = 0;
    virtual bool concurrent_safe() const { return false; }
    virtual ConditionMap extract(const Tensor& frame) const = 0;
};

/// 3x3 Sobel gradient magnitude of the channel-mean luminance, divided by
/// its largest attainable value (8 * sqrt(2) for inputs in [-1, 1]).
/// Borders replicate.
class ToyEdgeExtractor final : public ConditionExtractor {
public:
    ConditionKind kind() const override { return ConditionKind::kToyEdge; }
    std::string name() const override { return "toy-edge"; }
    bool concurrent_safe() const override { return true; }
    ConditionMap extract(const Tensor& frame) const override;
};

/// One map per frame, in frame order. A failing frame aborts with its index.
std::vector<ConditionMap> extract_conditions(const Video& video, const ConditionExtractor& extractor);

/// Area-average a frame-resolution map down to cell_width x cell_height.
/// The size ratio must be integral in both directions.
Tensor downscale_condition(const Tensor& map, int cell_width, int cell_height);

/// Per-frame condition cells at latent resolution, ready for grid assembly.
LatentStore condition_cells(std::span<const ConditionMap> maps, const GridLayout& layout);

/// Condition grids sharing `order` with the latent grids of the same step;
/// pad slots carry the last frame's map.
GridBatch conditions_to_grids(std::span<const ConditionMap> maps, const GridLayout& layout,
                              std::span<const std::size_t> order);

/// Rounds map values through the 8-bit cache representation so that freshly
/// extracted and cached maps are identical.
void quantize_condition(ConditionMap& map);

/// Cache directory used for `kind` beside a frame directory: <dir>/cond_<kind>.
std::filesystem::path condition_cache_dir(const std::filesystem::path& video_dir, ConditionKind kind);

/// Reads cached maps when the cache holds exactly one map per frame; otherwise
/// extracts with `extractor` (if given) and writes the cache. Kinds without
/// a built-in extractor must be supplied through the cache.
std::vector<ConditionMap> load_or_extract_conditions(const std::filesystem::path& video_dir, const Video& video,
                                                     ConditionKind kind, const ConditionExtractor* extractor);

}  // namespace rave
