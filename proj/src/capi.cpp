// Copyright (C) 2026 The RAVE Authors
// SPDX-License-Identifier: Apache-2.0

#include "rave/rave.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "rave/conditioning.hpp"
#include "rave/dataset.hpp"
#include "rave/error.hpp"
#include "rave/metrics.hpp"
#include "rave/sampler.hpp"
#include "rave/toy_adapters.hpp"
#include "rave/video_io.hpp"

struct rave_video {
    rave::Video video;
};

struct rave_run {
    rave::RunManifest manifest;
};

namespace {

thread_local std::string g_last_error;

rave_status to_status(rave::ErrorCode code) {
    switch (code) {
        case rave::ErrorCode::kInvalidArgument: return RAVE_ERR_INVALID_ARGUMENT;
        case rave::ErrorCode::kIo: return RAVE_ERR_IO;
        case rave::ErrorCode::kShape: return RAVE_ERR_SHAPE;
        case rave::ErrorCode::kSchema: return RAVE_ERR_SCHEMA;
        case rave::ErrorCode::kReplayMismatch: return RAVE_ERR_REPLAY_MISMATCH;
        case rave::ErrorCode::kAdapter: return RAVE_ERR_ADAPTER;
        case rave::ErrorCode::kUnavailable: return RAVE_ERR_UNAVAILABLE;
    }
    return RAVE_ERR_INTERNAL;
}

template <typename F>
rave_status guarded(F&& body) {
    try {
        g_last_error.clear();
        body();
        return RAVE_OK;
    } catch (const rave::Error& e) {
        g_last_error = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return RAVE_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return RAVE_ERR_INTERNAL;
    }
}

void require(const void* p, const char* what) {
    if (p == nullptr) rave::fail(rave::ErrorCode::kInvalidArgument, std::string(what) + " must not be NULL");
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out == nullptr) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

std::string str_or(const char* s, const char* fallback) { return s ? s : fallback; }

rave::EditConfig to_config(const rave_edit_options& o) {
    rave::EditConfig c;
    c.grid_rows = o.grid_rows;
    c.grid_cols = o.grid_cols;
    c.schedule.sampling_steps = o.steps;
    c.schedule.train_steps = o.train_steps;
    c.schedule.beta_start = o.beta_start;
    c.schedule.beta_end = o.beta_end;
    c.schedule.spacing = o.spacing == RAVE_SPACING_TRAILING ? rave::TimestepSpacing::kTrailing
                                                            : rave::TimestepSpacing::kLeading;
    c.guidance = o.guidance;
    c.seed = o.seed;
    c.shuffle = o.shuffle != 0;
    c.shuffle_inversion = o.shuffle_inversion != 0;
    c.prompt = str_or(o.prompt, "");
    c.inversion_prompt = str_or(o.inversion_prompt, "");
    const std::string cond = str_or(o.condition, "toy-edge");
    if (cond == "none") c.condition.reset();
    else c.condition = rave::parse_condition_kind(cond);
    return c;
}

class CallbackPredictor final : public rave::NoisePredictor {
public:
    explicit CallbackPredictor(const rave_predictor_callbacks& cb) : cb_(cb) {
        require(reinterpret_cast<const void*>(cb.predict), "predictor callback");
    }
    std::string name() const override { return cb_.name ? cb_.name : "callback"; }
    rave::Tensor predict(const rave::PredictRequest& r) const override {
        rave_predict_request req{};
        req.latent = r.latent->data();
        req.grid_height = r.latent->height();
        req.grid_width = r.latent->width();
        req.channels = r.latent->channels();
        req.rows = r.layout.rows;
        req.cols = r.layout.cols;
        req.timestep = r.timestep;
        req.text_embedding = r.text_embedding.data();
        req.text_embedding_size = r.text_embedding.size();
        req.condition = r.condition ? r.condition->data() : nullptr;
        req.frame_width = r.frame_width;
        req.frame_height = r.frame_height;
        rave::Tensor eps(r.latent->shape(), r.latent->kind());
        const int rc = cb_.predict(cb_.user_data, &req, eps.data());
        if (rc != 0) rave::fail(rave::ErrorCode::kAdapter, "predictor callback returned " + std::to_string(rc));
        return eps;
    }

private:
    rave_predictor_callbacks cb_;
};

/// Adapters and conditions assembled from C options.
struct Session {
    rave::EditConfig config;
    std::unique_ptr<rave::LatentCodec> codec;
    std::unique_ptr<rave::NoisePredictor> predictor;
    rave::ToyEdgeExtractor toy_edge;
    rave::ToyHashTextEncoder text_encoder;
    std::optional<std::vector<rave::ConditionMap>> cached;
    rave::Adapters adapters;

    Session(const rave::Video& video, const rave_edit_options& o, const rave_predictor_callbacks* cb)
        : config(to_config(o)) {
        codec = rave::make_codec(str_or(o.codec, "identity"));
        predictor = cb ? std::unique_ptr<rave::NoisePredictor>(new CallbackPredictor(*cb))
                       : rave::make_toy_predictor(str_or(o.predictor, "toy-coupled"));
        adapters.codec = codec.get();
        adapters.predictor = predictor.get();
        adapters.text_encoder = &text_encoder;
        if (config.condition) {
            const bool toy = *config.condition == rave::ConditionKind::kToyEdge;
            if (o.condition_cache_dir != nullptr) {
                cached = rave::load_or_extract_conditions(o.condition_cache_dir, video, *config.condition,
                                                          toy ? &toy_edge : nullptr);
            } else if (toy) {
                adapters.extractor = &toy_edge;
            } else {
                rave::fail(rave::ErrorCode::kUnavailable,
                           "no built-in extractor for '" + rave::to_string(*config.condition) +
                               "'; supply maps through condition_cache_dir");
            }
        }
    }

    const std::vector<rave::ConditionMap>* conditions() const { return cached ? &*cached : nullptr; }
};

void write_latents(const rave::LatentStore& latents, std::size_t frame_count, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) rave::fail(rave::ErrorCode::kIo, "cannot write " + path);
    const rave::Shape s = latents.latent_shape();
    const std::uint64_t counts[2] = {latents.size(), frame_count};
    const std::int32_t dims[3] = {s.height, s.width, s.channels};
    out.write("RAVELAT1", 8);
    out.write(reinterpret_cast<const char*>(counts), sizeof(counts));
    out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    for (const auto& t : latents.latents())
        out.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (!out) rave::fail(rave::ErrorCode::kIo, "short write to " + path);
}

}  // namespace

extern "C" {

const char* rave_version(void) { return "1.0.0"; }

const char* rave_last_error(void) { return g_last_error.c_str(); }

const char* rave_status_name(rave_status status) {
    switch (status) {
        case RAVE_OK: return "ok";
        case RAVE_ERR_INVALID_ARGUMENT: return "invalid argument";
        case RAVE_ERR_IO: return "i/o error";
        case RAVE_ERR_SHAPE: return "shape mismatch";
        case RAVE_ERR_SCHEMA: return "schema violation";
        case RAVE_ERR_REPLAY_MISMATCH: return "replay mismatch";
        case RAVE_ERR_ADAPTER: return "adapter failure";
        case RAVE_ERR_UNAVAILABLE: return "unavailable";
        case RAVE_ERR_INTERNAL: return "internal error";
    }
    return "unknown";
}

void rave_string_free(char* s) { std::free(s); }

rave_status rave_video_load(const char* dir, int target_width, int target_height, rave_video** out) {
    return guarded([&] {
        require(dir, "dir");
        require(out, "out");
        std::optional<rave::Resolution> target;
        if (target_width > 0 || target_height > 0) {
            if (target_width <= 0 || target_height <= 0)
                rave::fail(rave::ErrorCode::kInvalidArgument, "target resolution needs both width and height");
            target = rave::Resolution{target_width, target_height};
        }
        *out = new rave_video{rave::load_frames(dir, target)};
    });
}

rave_status rave_video_save(const rave_video* video, const char* dir) {
    return guarded([&] {
        require(video, "video");
        require(dir, "dir");
        rave::save_frames(video->video, dir);
    });
}

rave_status rave_video_create(size_t frame_count, int width, int height, const double* pixels, rave_video** out) {
    return guarded([&] {
        require(pixels, "pixels");
        require(out, "out");
        if (frame_count == 0 || width < 1 || height < 1)
            rave::fail(rave::ErrorCode::kInvalidArgument, "video needs at least one frame of positive size");
        std::vector<rave::Tensor> frames;
        const rave::Shape shape{height, width, 3};
        for (size_t k = 0; k < frame_count; ++k) {
            rave::Tensor f(shape, rave::MemoryKind::kPixel);
            std::memcpy(f.data(), pixels + k * shape.size(), shape.size() * sizeof(double));
            frames.push_back(std::move(f));
        }
        *out = new rave_video{rave::Video(std::move(frames))};
    });
}

void rave_video_free(rave_video* video) { delete video; }

size_t rave_video_frame_count(const rave_video* video) { return video ? video->video.frame_count() : 0; }
int rave_video_width(const rave_video* video) { return video ? video->video.width() : 0; }
int rave_video_height(const rave_video* video) { return video ? video->video.height() : 0; }

rave_status rave_video_copy_frame(const rave_video* video, size_t k, double* dst, size_t n) {
    return guarded([&] {
        require(video, "video");
        require(dst, "dst");
        if (k >= video->video.frame_count()) rave::fail(rave::ErrorCode::kInvalidArgument, "frame index out of range");
        const rave::Tensor& f = video->video.frame(k);
        if (n < f.size()) rave::fail(rave::ErrorCode::kInvalidArgument, "destination buffer too small");
        std::memcpy(dst, f.data(), f.size() * sizeof(double));
    });
}

void rave_edit_options_init(rave_edit_options* o) {
    if (o == nullptr) return;
    const rave::ScheduleParams defaults;
    *o = rave_edit_options{};
    o->steps = defaults.sampling_steps;
    o->train_steps = defaults.train_steps;
    o->beta_start = defaults.beta_start;
    o->beta_end = defaults.beta_end;
    o->spacing = RAVE_SPACING_LEADING;
    o->guidance = 7.5;
    o->shuffle = 1;
    o->prompt = "";
    o->inversion_prompt = "";
    o->condition = "toy-edge";
    o->codec = "identity";
    o->predictor = "toy-coupled";
}

rave_status rave_edit(const rave_video* source, const rave_edit_options* options,
                      const rave_predictor_callbacks* predictor, rave_video** edited, rave_run** run) {
    return guarded([&] {
        require(source, "source");
        require(options, "options");
        require(edited, "edited");
        Session s(source->video, *options, predictor);
        rave::EditResult r = rave::edit_video(source->video, s.config, s.adapters, s.conditions());
        auto out = std::make_unique<rave_video>(rave_video{std::move(r.video)});
        if (run) *run = new rave_run{std::move(r.manifest)};
        *edited = out.release();
    });
}

rave_status rave_invert(const rave_video* source, const rave_edit_options* options,
                        const rave_predictor_callbacks* predictor, const char* latents_path, rave_run** run) {
    return guarded([&] {
        require(source, "source");
        require(options, "options");
        require(latents_path, "latents_path");
        Session s(source->video, *options, predictor);
        rave::InversionResult r = rave::invert_only(source->video, s.config, s.adapters, s.conditions());
        write_latents(r.latents, source->video.frame_count(), latents_path);
        r.manifest.artifacts["latents"] = latents_path;
        if (run) *run = new rave_run{std::move(r.manifest)};
    });
}

rave_status rave_replay(const rave_video* source, const rave_run* run, const rave_edit_options* options,
                        const rave_predictor_callbacks* predictor, rave_video** edited) {
    return guarded([&] {
        require(source, "source");
        require(run, "run");
        require(edited, "edited");
        const rave::RunManifest& m = run->manifest;
        rave_edit_options recorded;
        rave_edit_options_init(&recorded);
        const std::string cond = m.config.condition ? rave::to_string(*m.config.condition) : "none";
        recorded.condition = cond.c_str();
        recorded.codec = m.adapters.codec.c_str();
        recorded.predictor = m.adapters.predictor.c_str();
        const bool cached = m.adapters.extractor.rfind("precomputed:", 0) == 0;
        if (cached && options && options->condition_cache_dir) recorded.condition_cache_dir = options->condition_cache_dir;
        else if (cached && m.artifacts.count("condition_cache")) recorded.condition_cache_dir = m.artifacts.at("condition_cache").c_str();
        if (options && options->codec) recorded.codec = options->codec;
        if (options && options->predictor) recorded.predictor = options->predictor;
        Session s(source->video, recorded, predictor);
        std::optional<rave::EditConfig> expected;
        if (options) expected = to_config(*options);
        rave::Video v = rave::replay(m, source->video, s.adapters, expected ? &*expected : nullptr, s.conditions());
        *edited = new rave_video{std::move(v)};
    });
}

rave_status rave_run_to_json(const rave_run* run, char** json) {
    return guarded([&] {
        require(run, "run");
        require(json, "json");
        *json = dup_string(rave::manifest_to_json(run->manifest));
    });
}

rave_status rave_run_from_json(const char* json, rave_run** run) {
    return guarded([&] {
        require(json, "json");
        require(run, "run");
        *run = new rave_run{rave::manifest_from_json(json)};
    });
}

rave_status rave_run_set_artifact(rave_run* run, const char* key, const char* value) {
    return guarded([&] {
        require(run, "run");
        require(key, "key");
        require(value, "value");
        run->manifest.artifacts[key] = value;
    });
}

void rave_run_free(rave_run* run) { delete run; }

rave_status rave_evaluate(const rave_video* source, const rave_video* edited, const char* prompt,
                          const char* embedder, const char* flow, rave_metrics* out, char** report_json) {
    return guarded([&] {
        require(source, "source");
        require(edited, "edited");
        require(prompt, "prompt");
        require(out, "out");
        const std::string emb_name = str_or(embedder, "toy");
        if (emb_name != "toy") rave::fail(rave::ErrorCode::kUnavailable, "unknown embedder '" + emb_name + "'");
        rave::ToyEmbedder emb;
        auto flow_provider = rave::make_flow_provider(str_or(flow, "block-match"));
        const rave::MetricsReport r = rave::evaluate(source->video, edited->video, prompt, emb, *flow_provider);
        *out = {r.clip_f, r.clip_t, r.warp_ssim, r.q_edit};
        if (report_json) *report_json = dup_string(rave::report_to_json(r));
    });
}

rave_status rave_format_table_row(const rave_metrics* metrics, const char* label, char** row) {
    return guarded([&] {
        require(metrics, "metrics");
        require(row, "row");
        rave::MetricsReport r;
        r.clip_f = metrics->clip_f;
        r.clip_t = metrics->clip_t;
        r.warp_ssim = metrics->warp_ssim;
        r.q_edit = metrics->q_edit;
        *row = dup_string(rave::report_table_row(r, str_or(label, "RAVE")));
    });
}

double rave_q_edit(double warp_ssim, double clip_t) { return rave::q_edit(warp_ssim, clip_t); }

rave_status rave_dataset_validate(const char* path, char** report_json) {
    rave::dataset::ValidationResult result;
    const rave_status st = guarded([&] {
        require(path, "path");
        std::ifstream in(path, std::ios::binary);
        if (!in) rave::fail(rave::ErrorCode::kIo, std::string("cannot open ") + path);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        result = rave::dataset::validate_json(text);
        if (report_json) *report_json = dup_string(rave::dataset::validation_to_json(result));
    });
    if (st != RAVE_OK) return st;
    if (!result.ok()) {
        g_last_error = std::to_string(result.errors.size()) + " schema error(s); first at " +
                       result.errors.front().pointer + ": " + result.errors.front().message;
        return RAVE_ERR_SCHEMA;
    }
    return RAVE_OK;
}

rave_status rave_dataset_summarize(const char* path, char** summary_json) {
    return guarded([&] {
        require(path, "path");
        require(summary_json, "summary_json");
        const auto m = rave::dataset::load_manifest(path);
        *summary_json = dup_string(rave::dataset::summary_to_json(rave::dataset::summarize(m)));
    });
}

}  // extern "C"
