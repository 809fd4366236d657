// Copyright (C) 2026 The RAVE Authors
// SPDX-License-Identifier: Apache-2.0

// Exercises the shared library through its C interface only.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "rave/rave.h"
#include "scratch_dir.hpp"

namespace {

constexpr int kW = 16;
constexpr int kH = 12;

std::vector<double> blob_pixels(std::size_t frames, double speed = 0.5) {
    std::vector<double> px;
    for (std::size_t k = 0; k < frames; ++k)
        for (int y = 0; y < kH; ++y)
            for (int x = 0; x < kW; ++x) {
                const double dx = x - 4.0 - speed * k, dy = y - 6.0;
                const double v = std::exp(-(dx * dx + dy * dy) / 8.0) * 1.6 - 0.8;
                for (int c = 0; c < 3; ++c) px.push_back(v + 0.05 * c);
            }
    return px;
}

rave_video* make_video(std::size_t frames, double speed = 0.5) {
    const auto px = blob_pixels(frames, speed);
    rave_video* v = nullptr;
    REQUIRE(rave_video_create(frames, kW, kH, px.data(), &v) == RAVE_OK);
    return v;
}

rave_edit_options small_options() {
    rave_edit_options o;
    rave_edit_options_init(&o);
    o.steps = 6;
    o.seed = 17;
    o.prompt = "a red ball";
    return o;
}

struct CallCounter {
    int calls = 0;
};

int scaled_predict(void* user, const rave_predict_request* r, double* eps) {
    ++static_cast<CallCounter*>(user)->calls;
    const std::size_t n = static_cast<std::size_t>(r->grid_height) * r->grid_width * r->channels;
    for (std::size_t i = 0; i < n; ++i) eps[i] = 0.2 * r->latent[i];
    return 0;
}

int failing_predict(void*, const rave_predict_request*, double*) { return 3; }

std::string take(char* s) {
    std::string out = s ? s : "";
    rave_string_free(s);
    return out;
}

}  // namespace

TEST_CASE("status names and last error") {
    CHECK(std::string(rave_status_name(RAVE_OK)) == "ok");
    CHECK(std::string(rave_status_name(RAVE_ERR_REPLAY_MISMATCH)) == "replay mismatch");
    CHECK(std::string(rave_version()).size() > 0);
    rave_video* v = nullptr;
    CHECK(rave_video_load("/nonexistent/rave/frames", 0, 0, &v) == RAVE_ERR_IO);
    CHECK(v == nullptr);
    CHECK(std::strlen(rave_last_error()) > 0);
}

TEST_CASE("options defaults") {
    rave_edit_options o;
    rave_edit_options_init(&o);
    CHECK(o.steps == 50);
    CHECK(o.train_steps == 1000);
    CHECK(o.guidance == 7.5);
    CHECK(o.shuffle == 1);
    CHECK(o.shuffle_inversion == 0);
    CHECK(o.grid_rows == 0);
    CHECK(std::string(o.condition) == "toy-edge");
}

TEST_CASE("video create, copy and disk round trip") {
    rave_video* v = make_video(3);
    CHECK(rave_video_frame_count(v) == 3);
    CHECK(rave_video_width(v) == kW);
    CHECK(rave_video_height(v) == kH);
    std::vector<double> frame(kW * kH * 3);
    REQUIRE(rave_video_copy_frame(v, 1, frame.data(), frame.size()) == RAVE_OK);
    CHECK(frame[0] == blob_pixels(3)[kW * kH * 3]);
    CHECK(rave_video_copy_frame(v, 3, frame.data(), frame.size()) != RAVE_OK);
    CHECK(rave_video_copy_frame(v, 0, frame.data(), frame.size() - 1) == RAVE_ERR_INVALID_ARGUMENT);

    rave::testing::ScratchDir dir("capi_video");
    REQUIRE(rave_video_save(v, dir.path().c_str()) == RAVE_OK);
    rave_video* back = nullptr;
    REQUIRE(rave_video_load(dir.path().c_str(), 0, 0, &back) == RAVE_OK);
    CHECK(rave_video_frame_count(back) == 3);
    std::vector<double> reread(frame.size());
    REQUIRE(rave_video_copy_frame(back, 1, reread.data(), reread.size()) == RAVE_OK);
    REQUIRE(rave_video_copy_frame(v, 1, frame.data(), frame.size()) == RAVE_OK);
    for (std::size_t i = 0; i < frame.size(); ++i) CHECK(std::abs(reread[i] - frame[i]) <= 1.0 / 127.5);
    rave_video_free(back);
    rave_video_free(v);
}

TEST_CASE("edit with a callback predictor, then replay") {
    rave_video* src = make_video(8);
    const rave_edit_options o = small_options();
    CallCounter counter;
    const rave_predictor_callbacks cb{"scaled", &counter, scaled_predict};
    rave_video* edited = nullptr;
    rave_run* run = nullptr;
    REQUIRE(rave_edit(src, &o, &cb, &edited, &run) == RAVE_OK);
    CHECK(rave_video_frame_count(edited) == 8);
    // 2x2 grids for 8 frames: 2 grids, one inversion call and two guided calls each, per step.
    CHECK(counter.calls == 6 * 2 * 3);

    char* text = nullptr;
    REQUIRE(rave_run_to_json(run, &text) == RAVE_OK);
    const std::string json = take(text);
    CHECK(json.find("\"scaled\"") != std::string::npos);

    rave_run* restored = nullptr;
    REQUIRE(rave_run_from_json(json.c_str(), &restored) == RAVE_OK);
    rave_video* again = nullptr;
    REQUIRE(rave_replay(src, restored, &o, &cb, &again) == RAVE_OK);
    std::vector<double> a(kW * kH * 3), b(a.size());
    for (std::size_t k = 0; k < 8; ++k) {
        rave_video_copy_frame(edited, k, a.data(), a.size());
        rave_video_copy_frame(again, k, b.data(), b.size());
        CHECK(a == b);
    }

    rave_edit_options altered = o;
    altered.seed = 18;
    rave_video* refused = nullptr;
    CHECK(rave_replay(src, restored, &altered, &cb, &refused) == RAVE_ERR_REPLAY_MISMATCH);
    CHECK(refused == nullptr);
    CHECK(std::string(rave_last_error()).find("seed") != std::string::npos);

    CHECK(rave_run_from_json("{\"not\": \"a run\"}", &restored) != RAVE_OK);

    rave_video_free(again);
    rave_run_free(restored);
    rave_run_free(run);
    rave_video_free(edited);
    rave_video_free(src);
}

TEST_CASE("built-in predictor edits are deterministic") {
    rave_video* src = make_video(5);
    const rave_edit_options o = small_options();
    rave_video *a = nullptr, *b = nullptr;
    REQUIRE(rave_edit(src, &o, nullptr, &a, nullptr) == RAVE_OK);
    REQUIRE(rave_edit(src, &o, nullptr, &b, nullptr) == RAVE_OK);
    std::vector<double> fa(kW * kH * 3), fb(fa.size());
    rave_video_copy_frame(a, 4, fa.data(), fa.size());
    rave_video_copy_frame(b, 4, fb.data(), fb.size());
    CHECK(fa == fb);
    rave_video_free(a);
    rave_video_free(b);
    rave_video_free(src);
}

TEST_CASE("predictor failures surface as adapter errors") {
    rave_video* src = make_video(8);
    const rave_edit_options o = small_options();
    const rave_predictor_callbacks cb{"broken", nullptr, failing_predict};
    rave_video* edited = nullptr;
    CHECK(rave_edit(src, &o, &cb, &edited, nullptr) == RAVE_ERR_ADAPTER);
    CHECK(edited == nullptr);
    rave_video_free(src);
}

TEST_CASE("inversion writes a latents file") {
    rave_video* src = make_video(8);
    const rave_edit_options o = small_options();
    rave::testing::ScratchDir dir("capi_invert");
    const std::string path = (dir.path() / "latents.bin").string();
    rave_run* run = nullptr;
    REQUIRE(rave_invert(src, &o, nullptr, path.c_str(), &run) == RAVE_OK);
    std::ifstream in(path, std::ios::binary);
    char magic[8] = {};
    in.read(magic, 8);
    CHECK(std::string(magic, 8) == "RAVELAT1");
    std::uint64_t padded = 0, original = 0;
    in.read(reinterpret_cast<char*>(&padded), 8);
    in.read(reinterpret_cast<char*>(&original), 8);
    CHECK(padded == 8);
    CHECK(original == 8);
    CHECK(std::filesystem::file_size(path) == 8 + 16 + 12 + 8 * static_cast<std::uintmax_t>(kW) * kH * 3 * 8);
    rave_run_free(run);
    rave_video_free(src);
}

TEST_CASE("metrics through the C interface") {
    rave_video* src = make_video(4, 0.0);
    rave_metrics m{};
    char* report = nullptr;
    REQUIRE(rave_evaluate(src, src, "a red ball", "toy", "zero", &m, &report) == RAVE_OK);
    CHECK(m.warp_ssim == 1.0);
    CHECK(m.q_edit == m.warp_ssim * m.clip_t);
    CHECK(take(report).find("\"q_edit\"") != std::string::npos);
    CHECK(rave_evaluate(src, src, "", "toy", "zero", &m, nullptr) != RAVE_OK);
    CHECK(rave_evaluate(src, src, "p", "clip", "zero", &m, nullptr) != RAVE_OK);

    const rave_metrics fixed{0.9595, 0.2951, 0.7144, rave_q_edit(0.7144, 0.2951)};
    char* row = nullptr;
    REQUIRE(rave_format_table_row(&fixed, "RAVE", &row) == RAVE_OK);
    CHECK(take(row) == "| RAVE | 95.95 | 71.44 | 29.51 | 21.08 |");
    CHECK(std::abs(rave_q_edit(0.8051, 0.2976) - 0.2396) <= 5e-5);
    rave_video_free(src);
}

TEST_CASE("dataset validation and summary") {
    rave::testing::ScratchDir dir("capi_dataset");
    const auto good = dir / "good.json";
    const auto bad = dir / "bad.json";
    std::ofstream(good) << R"({"name": "d", "version": "1", "videos": [{"id": "a", "source": "a/", "frame_count": 8,
        "resolution": [512, 320], "prompts": [{"text": "a sketch", "edit_type": "visual-style"}]}]})";
    std::ofstream(bad) << R"({"name": "d", "version": "1", "videos": [{"id": "a", "source": "a/", "frame_count": 8,
        "resolution": [512, 320], "prompts": [{"text": "a sketch", "edit_type": "recolor"}]}]})";

    char* out = nullptr;
    CHECK(rave_dataset_validate(good.c_str(), &out) == RAVE_OK);
    CHECK(take(out).find("\"valid\": true") != std::string::npos);
    out = nullptr;
    CHECK(rave_dataset_validate(bad.c_str(), &out) == RAVE_ERR_SCHEMA);
    CHECK(take(out).find("/videos/0/prompts/0/edit_type") != std::string::npos);
    out = nullptr;
    REQUIRE(rave_dataset_summarize(good.c_str(), &out) == RAVE_OK);
    CHECK(take(out).find("\"pairs\": 1") != std::string::npos);
    CHECK(rave_dataset_summarize(bad.c_str(), &out) == RAVE_ERR_SCHEMA);
    CHECK(rave_dataset_validate((dir / "missing.json").c_str(), &out) == RAVE_ERR_IO);
}

TEST_CASE("argument checking") {
    rave_video* v = nullptr;
    CHECK(rave_video_create(1, kW, kH, nullptr, &v) == RAVE_ERR_INVALID_ARGUMENT);
    CHECK(rave_edit(nullptr, nullptr, nullptr, nullptr, nullptr) == RAVE_ERR_INVALID_ARGUMENT);
    CHECK(rave_run_to_json(nullptr, nullptr) == RAVE_ERR_INVALID_ARGUMENT);
    CHECK(rave_dataset_validate(nullptr, nullptr) == RAVE_ERR_INVALID_ARGUMENT);

    rave_video* src = make_video(8);
    rave_edit_options o = small_options();
    o.condition = "depth";
    rave_video* edited = nullptr;
    CHECK(rave_edit(src, &o, nullptr, &edited, nullptr) == RAVE_ERR_UNAVAILABLE);
    o.condition = "none";
    o.grid_rows = 3;
    o.grid_cols = 0;
    CHECK(rave_edit(src, &o, nullptr, &edited, nullptr) == RAVE_ERR_INVALID_ARGUMENT);
    rave_video_free(src);
}
