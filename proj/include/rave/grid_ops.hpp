// Copyright (C) 2026 The RAVE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "rave/tensor.hpp"
#include "rave/video_io.hpp"

namespace rave {

/// n rows by m columns of equally sized cells, filled row-major.
struct GridLayout {
    int rows = 1;
    int cols = 1;
    int cell_width = 0;
    int cell_height = 0;

    int cells() const { return rows * cols; }
    int grid_width() const { return cols * cell_width; }
    int grid_height() const { return rows * cell_height; }
    friend bool operator==(const GridLayout&, const GridLayout&) = default;
};

/// Frame count padded up to a multiple of the grid size. Pad slots K..K'-1
/// replicate the last original frame.
struct PaddingPlan {
    std::size_t frame_count = 0;
    std::size_t padded_count = 0;

    std::size_t pad_count() const { return padded_count - frame_count; }
    std::size_t pad_source(std::size_t padded_index) const {
        return padded_index < frame_count ? padded_index : frame_count - 1;
    }
};

PaddingPlan plan_padding(std::size_t frame_count, std::size_t grid_cells);

struct GridBatch {
    GridLayout layout;
    std::size_t frame_count = 0;                     // original K; assignments >= K are pads
    std::vector<Tensor> grids;                       // L tensors, grid_height x grid_width x C
    std::vector<std::vector<std::size_t>> assignment;  // assignment[l][r*m + c] = padded frame index
};

/// Assembles every grid at once. `order` lists the K' padded indices slot by
/// slot; indices beyond latents.size() take the last latent.
GridBatch video2grid(const LatentStore& latents, const GridLayout& layout, std::span<const std::size_t> order);

/// Extracts the original K frames from a batch; pad cells are dropped.
LatentStore grid2video(const GridBatch& batch);

/// Single-grid building blocks used by the sampler so that only one grid is
/// resident at a time. `slots` holds the N frame indices of this grid.
Tensor assemble_grid(const LatentStore& latents, const GridLayout& layout, std::span<const std::size_t> slots,
                     MemoryKind kind = MemoryKind::kLatent);
void scatter_grid(const Tensor& grid, const GridLayout& layout, std::span<const std::size_t> slots,
                  LatentStore& latents);

/// Slot -> padded frame index. `forward[j]` is the frame placed in slot j.
struct Permutation {
    std::vector<std::size_t> forward;
    std::uint64_t seed = 0;
    int timestep = 0;

    friend bool operator==(const Permutation&, const Permutation&) = default;
};

/// Deterministic generator owned by a sampling run.
class PermutationRng {
public:
    explicit PermutationRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}
    std::uint64_t seed() const { return seed_; }
    /// Unbiased draw from [0, bound).
    std::uint64_t below(std::uint64_t bound);

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

/// Uniform Fisher-Yates shuffle of 0..padded_count-1.
Permutation sample_permutation(PermutationRng& rng, std::size_t padded_count, int timestep);
Permutation identity_permutation(std::size_t padded_count, int timestep);
Permutation invert_permutation(const Permutation& p);
/// (a . b)[j] = a.forward[b.forward[j]]
std::vector<std::size_t> compose(const Permutation& a, const Permutation& b);
bool is_bijection(std::span<const std::size_t> indices);

}  // namespace rave
