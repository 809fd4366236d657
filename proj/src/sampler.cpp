// Copyright (C) 2026 The RAVE Authors
// SPDX-License-Identifier: Apache-2.0

#include "rave/sampler.hpp"

#include <chrono>
#include <cstring>
#include <numeric>
#include <sstream>

#include "rave/error.hpp"

namespace rave {

std::pair<int, int> default_grid(std::size_t frame_count) {
    return frame_count == 8 ? std::pair{2, 2} : std::pair{3, 3};
}

std::pair<int, int> resolve_grid(const EditConfig& config, std::size_t frame_count) {
    if (config.grid_rows == 0 && config.grid_cols == 0) return default_grid(frame_count);
    if (config.grid_rows < 1 || config.grid_cols < 1)
        fail(ErrorCode::kInvalidArgument, "grid rows and columns must be >= 1");
    return {config.grid_rows, config.grid_cols};
}

AdapterIds adapter_ids(const Adapters& adapters, const EditConfig& config, bool conditions_supplied) {
    AdapterIds ids;
    ids.codec = adapters.codec ? adapters.codec->name() : "";
    ids.predictor = adapters.predictor ? adapters.predictor->name() : "";
    ids.text_encoder = adapters.text_encoder ? adapters.text_encoder->name() : "";
    if (config.condition) {
        ids.extractor = conditions_supplied || adapters.extractor == nullptr
                            ? "precomputed:" + to_string(*config.condition)
                            : adapters.extractor->name();
    }
    return ids;
}

namespace {

std::uint64_t fnv1a(std::uint64_t h, const void* bytes, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex(std::uint64_t h) {
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

std::uint64_t digest_tensors(const std::vector<Tensor>& tensors) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const auto& t : tensors) {
        const int dims[3] = {t.height(), t.width(), t.channels()};
        h = fnv1a(h, dims, sizeof(dims));
        h = fnv1a(h, t.data(), t.size() * sizeof(double));
    }
    return h;
}

Tensor call_predictor(const NoisePredictor& predictor, const PredictRequest& request, SamplingPhase phase) {
    Tensor eps;
    try {
        eps = predictor.predict(request);
    } catch (const std::exception& e) {
        fail(ErrorCode::kAdapter, std::string("noise predictor failed during ") +
                                      (phase == SamplingPhase::kInversion ? "inversion" : "sampling") +
                                      " at timestep " + std::to_string(request.timestep) + ": " + e.what());
    }
    if (eps.shape() != request.latent->shape())
        fail(ErrorCode::kAdapter, "noise predictor returned a wrongly shaped tensor at timestep " +
                                      std::to_string(request.timestep));
    return eps;
}

void check_order(std::span<const std::size_t> order, std::size_t expected) {
    if (order.size() != expected || !is_bijection(order))
        fail(ErrorCode::kInvalidArgument, "frame order is not a permutation of the padded frames");
}

}  // namespace

std::string video_digest(const Video& video) { return hex(digest_tensors(video.frames())); }
std::string latent_digest(const LatentStore& latents) { return hex(digest_tensors(latents.latents())); }

void invert_latents(LatentStore& latents, const GridContext& grid, const NoisePredictor& predictor,
                    const DiffusionSchedule& sched, std::span<const double> inversion_embedding,
                    const PermutationSource* shuffles) {
    const auto n = static_cast<std::size_t>(grid.layout.cells());
    if (latents.size() % n != 0) fail(ErrorCode::kInvalidArgument, "latent count is not padded to the grid size");
    std::vector<std::size_t> sequential(latents.size());
    std::iota(sequential.begin(), sequential.end(), std::size_t{0});

    const auto& ts = sched.timesteps();
    for (auto it = ts.rbegin(); it != ts.rend(); ++it) {
        const int t = *it;
        const int t_prev = sched.previous(t);
        Permutation shuffled;
        std::span<const std::size_t> order = sequential;
        if (shuffles != nullptr) {
            shuffled = (*shuffles)(SamplingPhase::kInversion, t);
            check_order(shuffled.forward, latents.size());
            order = shuffled.forward;
        }
        for (std::size_t start = 0; start < order.size(); start += n) {
            auto slots = order.subspan(start, n);
            const Tensor z = assemble_grid(latents, grid.layout, slots);
            std::optional<Tensor> cond;
            if (grid.condition_cells != nullptr)
                cond = assemble_grid(*grid.condition_cells, grid.layout, slots, MemoryKind::kCondition);
            PredictRequest req{&z, t, inversion_embedding, cond ? &*cond : nullptr, grid.layout, grid.frame_width,
                               grid.frame_height};
            const Tensor eps = call_predictor(predictor, req, SamplingPhase::kInversion);
            scatter_grid(ddim_invert_step(z, eps, t_prev, t, sched), grid.layout, slots, latents);
        }
    }
}

void sample_latents(LatentStore& latents, const GridContext& grid, const NoisePredictor& predictor,
                    const DiffusionSchedule& sched, std::span<const double> uncond_embedding,
                    std::span<const double> cond_embedding, GuidanceConfig guidance, const PermutationSource& order_for) {
    const auto n = static_cast<std::size_t>(grid.layout.cells());
    if (latents.size() % n != 0) fail(ErrorCode::kInvalidArgument, "latent count is not padded to the grid size");

    for (const int t : sched.timesteps()) {
        const int t_prev = sched.previous(t);
        const Permutation perm = order_for(SamplingPhase::kSampling, t);
        check_order(perm.forward, latents.size());
        const std::span<const std::size_t> order = perm.forward;
        for (std::size_t start = 0; start < order.size(); start += n) {
            auto slots = order.subspan(start, n);
            const Tensor z = assemble_grid(latents, grid.layout, slots);
            std::optional<Tensor> cond;
            if (grid.condition_cells != nullptr)
                cond = assemble_grid(*grid.condition_cells, grid.layout, slots, MemoryKind::kCondition);
            const Tensor* cond_ptr = cond ? &*cond : nullptr;

            Tensor eps;
            {
                PredictRequest req{&z, t, cond_embedding, cond_ptr, grid.layout, grid.frame_width, grid.frame_height};
                if (guidance.scale == 1.0) {
                    eps = call_predictor(predictor, req, SamplingPhase::kSampling);
                } else {
                    PredictRequest ureq = req;
                    ureq.text_embedding = uncond_embedding;
                    const Tensor eps_u = call_predictor(predictor, ureq, SamplingPhase::kSampling);
                    if (guidance.scale == 0.0) {
                        eps = eps_u;
                    } else {
                        const Tensor eps_c = call_predictor(predictor, req, SamplingPhase::kSampling);
                        eps = guide(eps_u, eps_c, guidance);
                    }
                }
            }
            scatter_grid(ddim_denoise_step(z, eps, t, t_prev, sched), grid.layout, slots, latents);
        }
    }
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

/// Every permutation a run will consume, in draw order.
std::vector<PermutationRecord> draw_permutations(const EditConfig& config, std::size_t padded_count,
                                                 const DiffusionSchedule& sched) {
    std::vector<PermutationRecord> records;
    PermutationRng rng(config.seed);
    const auto& ts = sched.timesteps();
    if (config.shuffle_inversion) {
        for (auto it = ts.rbegin(); it != ts.rend(); ++it)
            records.push_back({SamplingPhase::kInversion, sample_permutation(rng, padded_count, *it)});
    }
    for (const int t : ts) {
        Permutation p = config.shuffle ? sample_permutation(rng, padded_count, t) : identity_permutation(padded_count, t);
        p.seed = config.seed;
        records.push_back({SamplingPhase::kSampling, std::move(p)});
    }
    return records;
}

/// Hands out recorded permutations in order, checking phase and timestep.
class RecordedOrder {
public:
    explicit RecordedOrder(const std::vector<PermutationRecord>& records) : records_(records) {}
    Permutation next(SamplingPhase phase, int timestep) {
        if (pos_ >= records_.size()) fail(ErrorCode::kReplayMismatch, "permutation record exhausted");
        const PermutationRecord& r = records_[pos_++];
        if (r.phase != phase || r.permutation.timestep != timestep)
            fail(ErrorCode::kReplayMismatch, "permutation record out of step at timestep " + std::to_string(timestep));
        return r.permutation;
    }

private:
    const std::vector<PermutationRecord>& records_;
    std::size_t pos_ = 0;
};

struct Prepared {
    LatentStore latents;
    std::vector<ConditionMap> owned_conditions;
    LatentStore condition_cells;
    bool conditioned = false;
    GridContext grid;
    PaddingPlan plan;
};

void require_adapters(const Adapters& a) {
    if (a.codec == nullptr || a.predictor == nullptr || a.text_encoder == nullptr)
        fail(ErrorCode::kInvalidArgument, "codec, predictor and text encoder adapters are required");
}

Prepared prepare(const Video& video, const EditConfig& config, const Adapters& adapters,
                 const std::vector<ConditionMap>* conditions) {
    require_adapters(adapters);
    if (video.empty()) fail(ErrorCode::kInvalidArgument, "empty video");
    const auto spec = adapters.codec->spec();
    check_divisible(video.resolution(), spec.scale_factor);

    Prepared p;
    const auto [rows, cols] = resolve_grid(config, video.frame_count());
    p.grid.layout = {rows, cols, video.width() / spec.scale_factor, video.height() / spec.scale_factor};
    p.grid.frame_width = video.width();
    p.grid.frame_height = video.height();
    p.plan = plan_padding(video.frame_count(), static_cast<std::size_t>(rows * cols));

    if (config.condition) {
        if (conditions == nullptr) {
            if (adapters.extractor == nullptr)
                fail(ErrorCode::kInvalidArgument, "conditioning requested without an extractor or precomputed maps");
            if (adapters.extractor->kind() != *config.condition)
                fail(ErrorCode::kInvalidArgument, "extractor kind does not match the configured condition");
            p.owned_conditions = extract_conditions(video, *adapters.extractor);
            conditions = &p.owned_conditions;
        }
        if (conditions->size() != video.frame_count())
            fail(ErrorCode::kInvalidArgument, "expected one condition map per frame");
        p.condition_cells = condition_cells(*conditions, p.grid.layout);
        p.owned_conditions.clear();
        p.conditioned = true;
    }

    p.latents = encode(video, *adapters.codec);
    for (std::size_t k = video.frame_count(); k < p.plan.padded_count; ++k)
        p.latents.push_back(p.latents[p.plan.pad_source(k)]);
    return p;
}

RunManifest start_manifest(const Video& video, const EditConfig& config, const Adapters& adapters,
                           const Prepared& p, bool conditions_supplied) {
    RunManifest m;
    m.config = config;
    m.adapters = adapter_ids(adapters, config, conditions_supplied);
    m.frame_count = video.frame_count();
    m.resolution = video.resolution();
    m.padded_count = p.plan.padded_count;
    m.grid_rows = p.grid.layout.rows;
    m.grid_cols = p.grid.layout.cols;
    m.input_digest = video_digest(video);
    return m;
}

struct RunOutput {
    LatentStore latents;
    Video video;
    RunManifest manifest;
};

RunOutput run(const Video& video, const EditConfig& config, const Adapters& adapters,
              const std::vector<ConditionMap>* conditions, const std::vector<PermutationRecord>* recorded,
              bool invert_only) {
    auto t0 = Clock::now();
    Prepared p = prepare(video, config, adapters, conditions);
    if (p.conditioned) p.grid.condition_cells = &p.condition_cells;
    const DiffusionSchedule sched = make_schedule(config.schedule);
    RunManifest m = start_manifest(video, config, adapters, p, conditions != nullptr);
    m.permutations = recorded ? *recorded : draw_permutations(config, p.plan.padded_count, sched);
    const std::vector<double> uncond = adapters.text_encoder->encode("");
    const std::vector<double> cond = adapters.text_encoder->encode(config.prompt);
    const std::vector<double> inv = adapters.text_encoder->encode(config.inversion_prompt);
    m.timings.preprocess_ms = elapsed_ms(t0);

    RecordedOrder order(m.permutations);
    PermutationSource source = [&order](SamplingPhase phase, int t) { return order.next(phase, t); };

    t0 = Clock::now();
    invert_latents(p.latents, p.grid, *adapters.predictor, sched, inv, config.shuffle_inversion ? &source : nullptr);
    m.timings.inversion_ms = elapsed_ms(t0);

    RunOutput out;
    if (invert_only) {
        if (config.shuffle_inversion) {
            std::erase_if(m.permutations, [](const PermutationRecord& r) { return r.phase != SamplingPhase::kInversion; });
        } else {
            m.permutations.clear();
        }
        m.output_digest = latent_digest(p.latents);
        out.latents = std::move(p.latents);
        out.manifest = std::move(m);
        return out;
    }

    t0 = Clock::now();
    sample_latents(p.latents, p.grid, *adapters.predictor, sched, uncond, cond, {config.guidance}, source);
    m.timings.sampling_ms = elapsed_ms(t0);

    t0 = Clock::now();
    p.latents.truncate(video.frame_count());
    out.video = decode(p.latents, *adapters.codec);
    m.timings.decode_ms = elapsed_ms(t0);
    m.output_digest = video_digest(out.video);
    out.manifest = std::move(m);
    return out;
}

}  // namespace

LatentStore invert_video(LatentStore latents, const std::vector<ConditionMap>* conditions, const Adapters& adapters,
                         const DiffusionSchedule& sched, const EditConfig& config, int frame_width,
                         int frame_height) {
    require_adapters(adapters);
    if (latents.empty()) fail(ErrorCode::kInvalidArgument, "no latents to invert");
    const std::size_t k = latents.size();
    const auto [rows, cols] = resolve_grid(config, k);
    GridContext grid;
    grid.layout = {rows, cols, latents.latent_shape().width, latents.latent_shape().height};
    grid.frame_width = frame_width;
    grid.frame_height = frame_height;
    LatentStore cells;
    if (conditions != nullptr) {
        cells = condition_cells(*conditions, grid.layout);
        grid.condition_cells = &cells;
    }
    const PaddingPlan plan = plan_padding(k, static_cast<std::size_t>(rows * cols));
    for (std::size_t i = k; i < plan.padded_count; ++i) latents.push_back(latents[plan.pad_source(i)]);

    const std::vector<double> inv = adapters.text_encoder->encode(config.inversion_prompt);
    if (config.shuffle_inversion) {
        PermutationRng rng(config.seed);
        PermutationSource source = [&rng, &plan](SamplingPhase, int t) {
            return sample_permutation(rng, plan.padded_count, t);
        };
        invert_latents(latents, grid, *adapters.predictor, sched, inv, &source);
    } else {
        invert_latents(latents, grid, *adapters.predictor, sched, inv);
    }
    return latents;
}

EditResult edit_video(const Video& video, const EditConfig& config, const Adapters& adapters,
                      const std::vector<ConditionMap>* conditions) {
    RunOutput out = run(video, config, adapters, conditions, nullptr, false);
    return {std::move(out.video), std::move(out.manifest)};
}

InversionResult invert_only(const Video& video, const EditConfig& config, const Adapters& adapters,
                            const std::vector<ConditionMap>* conditions) {
    RunOutput out = run(video, config, adapters, conditions, nullptr, true);
    return {std::move(out.latents), std::move(out.manifest)};
}

namespace {

template <typename T>
void diff_field(std::vector<std::string>& out, const char* name, const T& a, const T& b) {
    if (a == b) return;
    std::ostringstream os;
    os.precision(17);
    os << name << ": " << a << " != " << b;
    out.push_back(os.str());
}

std::string condition_name(const std::optional<ConditionKind>& c) { return c ? to_string(*c) : "none"; }

}  // namespace

std::vector<std::string> config_differences(const EditConfig& a, const EditConfig& b) {
    std::vector<std::string> out;
    diff_field(out, "grid_rows", a.grid_rows, b.grid_rows);
    diff_field(out, "grid_cols", a.grid_cols, b.grid_cols);
    diff_field(out, "steps", a.schedule.sampling_steps, b.schedule.sampling_steps);
    diff_field(out, "train_steps", a.schedule.train_steps, b.schedule.train_steps);
    diff_field(out, "beta_start", a.schedule.beta_start, b.schedule.beta_start);
    diff_field(out, "beta_end", a.schedule.beta_end, b.schedule.beta_end);
    diff_field(out, "spacing", static_cast<int>(a.schedule.spacing), static_cast<int>(b.schedule.spacing));
    diff_field(out, "guidance", a.guidance, b.guidance);
    diff_field(out, "shuffle", a.shuffle, b.shuffle);
    diff_field(out, "shuffle_inversion", a.shuffle_inversion, b.shuffle_inversion);
    diff_field(out, "seed", a.seed, b.seed);
    diff_field(out, "prompt", a.prompt, b.prompt);
    diff_field(out, "inversion_prompt", a.inversion_prompt, b.inversion_prompt);
    diff_field(out, "condition", condition_name(a.condition), condition_name(b.condition));
    return out;
}

Video replay(const RunManifest& manifest, const Video& video, const Adapters& adapters, const EditConfig* expected,
             const std::vector<ConditionMap>* conditions) {
    require_adapters(adapters);
    std::vector<std::string> problems;
    const AdapterIds ids = adapter_ids(adapters, manifest.config, conditions != nullptr);
    diff_field(problems, "adapters.codec", manifest.adapters.codec, ids.codec);
    diff_field(problems, "adapters.predictor", manifest.adapters.predictor, ids.predictor);
    diff_field(problems, "adapters.text_encoder", manifest.adapters.text_encoder, ids.text_encoder);
    diff_field(problems, "adapters.extractor", manifest.adapters.extractor, ids.extractor);
    if (expected != nullptr) {
        for (auto& d : config_differences(manifest.config, *expected)) problems.push_back("config." + d);
    }
    diff_field(problems, "input_digest", manifest.input_digest, video_digest(video));

    if (problems.empty()) {
        const DiffusionSchedule sched = make_schedule(manifest.config.schedule);
        const auto [rows, cols] = resolve_grid(manifest.config, video.frame_count());
        const PaddingPlan plan = plan_padding(video.frame_count(), static_cast<std::size_t>(rows * cols));
        if (plan.padded_count != manifest.padded_count) problems.push_back("padded_count differs");
        else if (draw_permutations(manifest.config, plan.padded_count, sched) != manifest.permutations)
            problems.push_back("permutations: recorded sequence does not follow from config (seed/shuffle)");
    }
    auto refuse = [&problems]() {
        std::string msg = "replay refused:";
        for (const auto& p : problems) msg += "\n  " + p;
        fail(ErrorCode::kReplayMismatch, msg);
    };
    if (!problems.empty()) refuse();

    RunOutput out = run(video, manifest.config, adapters, conditions, &manifest.permutations, false);
    if (out.manifest.output_digest != manifest.output_digest) {
        problems.push_back("output_digest: " + manifest.output_digest + " != " + out.manifest.output_digest);
        refuse();
    }
    return std::move(out.video);
}

}  // namespace rave
