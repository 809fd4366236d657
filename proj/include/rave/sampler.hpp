// Copyright (C) 2026 The RAVE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rave/conditioning.hpp"
#include "rave/diffusion.hpp"
#include "rave/grid_ops.hpp"
#include "rave/toy_adapters.hpp"
#include "rave/video_io.hpp"

namespace rave {

struct EditConfig {
    int grid_rows = 0;  // 0 selects the default for the frame count
    int grid_cols = 0;
    ScheduleParams schedule;
    double guidance = 7.5;
    bool shuffle = true;
    bool shuffle_inversion = false;
    std::uint64_t seed = 0;
    std::string prompt;
    std::string inversion_prompt;
    std::optional<ConditionKind> condition = ConditionKind::kToyEdge;

    friend bool operator==(const EditConfig&, const EditConfig&) = default;
};

/// 2x2 for 8-frame clips, 3x3 otherwise.
std::pair<int, int> default_grid(std::size_t frame_count);

/// Concrete (rows, cols) for a config and clip length.
std::pair<int, int> resolve_grid(const EditConfig& config, std::size_t frame_count);

struct Adapters {
    const LatentCodec* codec = nullptr;
    const NoisePredictor* predictor = nullptr;
    const ConditionExtractor* extractor = nullptr;  // required only when conditions are not supplied
    const TextEncoder* text_encoder = nullptr;
};

struct AdapterIds {
    std::string codec;
    std::string predictor;
    std::string extractor;
    std::string text_encoder;

    friend bool operator==(const AdapterIds&, const AdapterIds&) = default;
};

/// Identities recorded in manifests. Supplied condition maps are recorded as
/// "precomputed:<kind>" instead of the extractor's name.
AdapterIds adapter_ids(const Adapters& adapters, const EditConfig& config, bool conditions_supplied = false);

enum class SamplingPhase { kInversion, kSampling };

struct PermutationRecord {
    SamplingPhase phase = SamplingPhase::kSampling;
    Permutation permutation;

    friend bool operator==(const PermutationRecord&, const PermutationRecord&) = default;
};

struct PhaseTimings {
    double preprocess_ms = 0;
    double inversion_ms = 0;
    double sampling_ms = 0;
    double decode_ms = 0;
};

/// Everything needed to reproduce an edit bit-exactly.
struct RunManifest {
    int version = 1;
    EditConfig config;
    AdapterIds adapters;
    std::size_t frame_count = 0;
    Resolution resolution;
    std::size_t padded_count = 0;
    int grid_rows = 0;
    int grid_cols = 0;
    std::vector<PermutationRecord> permutations;
    PhaseTimings timings;
    std::map<std::string, std::string> artifacts;
    std::string input_digest;
    std::string output_digest;
};

std::string manifest_to_json(const RunManifest& manifest, int indent = 2);
/// Throws kSchema on malformed documents.
RunManifest manifest_from_json(const std::string& text);

/// Hex FNV-1a 64 over every pixel value, frame by frame.
std::string video_digest(const Video& video);
std::string latent_digest(const LatentStore& latents);

/// Supplies the frame order for one timestep of one phase.
using PermutationSource = std::function<Permutation(SamplingPhase phase, int timestep)>;

/// Denoiser-facing state shared by inversion and sampling.
struct GridContext {
    GridLayout layout;
    const LatentStore* condition_cells = nullptr;  // per original frame, cell resolution; may be null
    int frame_width = 0;
    int frame_height = 0;
};

/// DDIM inversion of every (padded) per-frame latent from the clean boundary
/// up to the schedule's largest timestep. Inversion uses sequential grids
/// unless `shuffles` is given, with guidance fixed at 1.
void invert_latents(LatentStore& latents, const GridContext& grid, const NoisePredictor& predictor,
                    const DiffusionSchedule& sched, std::span<const double> inversion_embedding,
                    const PermutationSource* shuffles = nullptr);

/// DDIM sampling with classifier-free guidance. Each timestep draws its
/// frame order from `order`, denoises one grid at a time and writes the
/// result back under the original frame indices.
void sample_latents(LatentStore& latents, const GridContext& grid, const NoisePredictor& predictor,
                    const DiffusionSchedule& sched, std::span<const double> uncond_embedding,
                    std::span<const double> cond_embedding, GuidanceConfig guidance, const PermutationSource& order);

/// Pads `latents` to the plan, inverts on sequential grids, and returns the
/// noisy latents keyed by original frame index (pads included).
LatentStore invert_video(LatentStore latents, const std::vector<ConditionMap>* conditions, const Adapters& adapters,
                         const DiffusionSchedule& sched, const EditConfig& config, int frame_width, int frame_height);

struct EditResult {
    Video video;
    RunManifest manifest;
};

/// Full edit: encode, condition, invert, shuffled sampling, decode.
/// `conditions`, when given, replaces extraction (e.g. a disk cache).
EditResult edit_video(const Video& video, const EditConfig& config, const Adapters& adapters,
                      const std::vector<ConditionMap>* conditions = nullptr);

/// Noisy latents after inversion only, with the matching manifest.
struct InversionResult {
    LatentStore latents;
    RunManifest manifest;
};
InversionResult invert_only(const Video& video, const EditConfig& config, const Adapters& adapters,
                            const std::vector<ConditionMap>* conditions = nullptr);

/// Re-runs a recorded edit with the recorded permutations. Refuses
/// (kReplayMismatch, listing each differing field) when the adapters, the
/// input, the optional `expected` config, the permutation record or the
/// output digest disagree with the manifest.
Video replay(const RunManifest& manifest, const Video& video, const Adapters& adapters,
             const EditConfig* expected = nullptr, const std::vector<ConditionMap>* conditions = nullptr);

/// Field-by-field differences between two configs ("seed: 1 != 2").
std::vector<std::string> config_differences(const EditConfig& recorded, const EditConfig& requested);

}  // namespace rave
