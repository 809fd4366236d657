// Copyright (C) 2026 The RAVE Authors
// SPDX-License-Identifier: Apache-2.0

#include "rave/grid_ops.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "rave/error.hpp"

namespace rave {

PaddingPlan plan_padding(std::size_t frame_count, std::size_t grid_cells) {
    if (frame_count < 1 || grid_cells < 1) fail(ErrorCode::kInvalidArgument, "padding needs K >= 1 and N >= 1");
    const std::size_t grids = (frame_count + grid_cells - 1) / grid_cells;
    return {frame_count, grids * grid_cells};
}

bool is_bijection(std::span<const std::size_t> indices) {
    std::vector<bool> seen(indices.size(), false);
    for (std::size_t idx : indices) {
        if (idx >= indices.size() || seen[idx]) return false;
        seen[idx] = true;
    }
    return true;
}

namespace {

void check_cell(const Tensor& latent, const GridLayout& layout) {
    if (latent.height() != layout.cell_height || latent.width() != layout.cell_width)
        fail(ErrorCode::kShape, "latent " + std::to_string(latent.width()) + "x" + std::to_string(latent.height()) +
                                    " does not match grid cell " + std::to_string(layout.cell_width) + "x" +
                                    std::to_string(layout.cell_height));
}

void copy_into_cell(const Tensor& src, Tensor& grid, const GridLayout& layout, int cell) {
    const int r = cell / layout.cols;
    const int c = cell % layout.cols;
    const auto row_len = static_cast<std::size_t>(layout.cell_width) * static_cast<std::size_t>(src.channels());
    for (int y = 0; y < layout.cell_height; ++y) {
        const double* from = &src.at(y, 0, 0);
        double* to = &grid.at(r * layout.cell_height + y, c * layout.cell_width, 0);
        std::copy(from, from + row_len, to);
    }
}

void copy_from_cell(const Tensor& grid, Tensor& dst, const GridLayout& layout, int cell) {
    const int r = cell / layout.cols;
    const int c = cell % layout.cols;
    const auto row_len = static_cast<std::size_t>(layout.cell_width) * static_cast<std::size_t>(dst.channels());
    for (int y = 0; y < layout.cell_height; ++y) {
        const double* from = &grid.at(r * layout.cell_height + y, c * layout.cell_width, 0);
        std::copy(from, from + row_len, &dst.at(y, 0, 0));
    }
}

}  // namespace

Tensor assemble_grid(const LatentStore& latents, const GridLayout& layout, std::span<const std::size_t> slots,
                     MemoryKind kind) {
    if (latents.empty()) fail(ErrorCode::kShape, "no latents to assemble");
    if (slots.size() != static_cast<std::size_t>(layout.cells()))
        fail(ErrorCode::kInvalidArgument, "grid needs exactly " + std::to_string(layout.cells()) + " slots");
    const Shape cell = latents.latent_shape();
    check_cell(latents[0], layout);
    Tensor grid({layout.grid_height(), layout.grid_width(), cell.channels}, kind);
    for (int j = 0; j < layout.cells(); ++j) {
        const std::size_t src = std::min(slots[static_cast<std::size_t>(j)], latents.size() - 1);
        copy_into_cell(latents[src], grid, layout, j);
    }
    return grid;
}

void scatter_grid(const Tensor& grid, const GridLayout& layout, std::span<const std::size_t> slots,
                  LatentStore& latents) {
    if (grid.height() != layout.grid_height() || grid.width() != layout.grid_width())
        fail(ErrorCode::kShape, "grid tensor does not match layout");
    for (int j = 0; j < layout.cells(); ++j) {
        const std::size_t dst = slots[static_cast<std::size_t>(j)];
        if (dst >= latents.size()) fail(ErrorCode::kInvalidArgument, "slot index out of range");
        Tensor& target = latents[dst];
        if (target.channels() != grid.channels()) fail(ErrorCode::kShape, "channel mismatch on scatter");
        copy_from_cell(grid, target, layout, j);
    }
}

GridBatch video2grid(const LatentStore& latents, const GridLayout& layout, std::span<const std::size_t> order) {
    const auto n = static_cast<std::size_t>(layout.cells());
    if (layout.rows < 1 || layout.cols < 1) fail(ErrorCode::kInvalidArgument, "grid needs n, m >= 1");
    if (latents.empty()) fail(ErrorCode::kShape, "no latents");
    if (!is_bijection(order)) fail(ErrorCode::kInvalidArgument, "grid order is not a bijection");
    if (order.size() % n != 0 || order.size() < latents.size() || order.size() - latents.size() >= n)
        fail(ErrorCode::kInvalidArgument, "order length " + std::to_string(order.size()) +
                                              " is not the padded count for " + std::to_string(latents.size()) +
                                              " frames");
    GridBatch batch;
    batch.layout = layout;
    batch.frame_count = latents.size();
    for (std::size_t start = 0; start < order.size(); start += n) {
        auto slots = order.subspan(start, n);
        batch.grids.push_back(assemble_grid(latents, layout, slots));
        batch.assignment.emplace_back(slots.begin(), slots.end());
    }
    return batch;
}

LatentStore grid2video(const GridBatch& batch) {
    const auto n = static_cast<std::size_t>(batch.layout.cells());
    if (batch.grids.size() != batch.assignment.size()) fail(ErrorCode::kInvalidArgument, "malformed grid batch");
    std::vector<std::size_t> flat;
    for (const auto& a : batch.assignment) {
        if (a.size() != n) fail(ErrorCode::kInvalidArgument, "malformed assignment: wrong cell count");
        flat.insert(flat.end(), a.begin(), a.end());
    }
    if (!is_bijection(flat) || flat.size() < batch.frame_count)
        fail(ErrorCode::kInvalidArgument, "malformed assignment: not a partition of the padded indices");
    if (batch.grids.empty()) return {};

    const Shape cell{batch.layout.cell_height, batch.layout.cell_width, batch.grids.front().channels()};
    std::vector<Tensor> frames(batch.frame_count);
    for (std::size_t l = 0; l < batch.grids.size(); ++l) {
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t idx = batch.assignment[l][j];
            if (idx >= batch.frame_count) continue;
            Tensor t(cell, MemoryKind::kLatent);
            copy_from_cell(batch.grids[l], t, batch.layout, static_cast<int>(j));
            frames[idx] = std::move(t);
        }
    }
    return LatentStore(std::move(frames));
}

std::uint64_t PermutationRng::below(std::uint64_t bound) {
    // Rejection sampling keeps the draw exactly uniform and independent of
    // the standard library's distribution implementation.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % bound;
}

Permutation identity_permutation(std::size_t padded_count, int timestep) {
    Permutation p;
    p.forward.resize(padded_count);
    std::iota(p.forward.begin(), p.forward.end(), std::size_t{0});
    p.timestep = timestep;
    return p;
}

Permutation sample_permutation(PermutationRng& rng, std::size_t padded_count, int timestep) {
    if (padded_count < 1) fail(ErrorCode::kInvalidArgument, "permutation over an empty set");
    Permutation p = identity_permutation(padded_count, timestep);
    p.seed = rng.seed();
    for (std::size_t i = padded_count - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i + 1));
        std::swap(p.forward[i], p.forward[j]);
    }
    return p;
}

Permutation invert_permutation(const Permutation& p) {
    if (!is_bijection(p.forward)) fail(ErrorCode::kInvalidArgument, "not a permutation");
    Permutation inv = p;
    for (std::size_t j = 0; j < p.forward.size(); ++j) inv.forward[p.forward[j]] = j;
    return inv;
}

std::vector<std::size_t> compose(const Permutation& a, const Permutation& b) {
    if (a.forward.size() != b.forward.size()) fail(ErrorCode::kInvalidArgument, "permutation sizes differ");
    std::vector<std::size_t> out(a.forward.size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = a.forward[b.forward[j]];
    return out;
}

}  // namespace rave
