// Copyright (C) 2026 The RAVE Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <atomic>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "rave/error.hpp"
#include "rave/sampler.hpp"
#include "support.hpp"

using namespace rave;
using rave::testing::across_frame_std;
using rave::testing::max_abs_diff;
using rave::testing::moving_blob_video;
using rave::testing::random_latents;

namespace {

struct Rig {
    IdentityCodec codec;
    ToyEdgeExtractor extractor;
    ToyHashTextEncoder text;
    Adapters with(const NoisePredictor& p) const { return {&codec, &p, &extractor, &text}; }
};

EditConfig config(std::uint64_t seed, bool shuffle, int steps = 20) {
    EditConfig c;
    c.seed = seed;
    c.shuffle = shuffle;
    c.schedule.sampling_steps = steps;
    c.prompt = "a marble statue";
    return c;
}

/// Records the timestep of every call.
class CountingPredictor final : public NoisePredictor {
public:
    std::string name() const override { return "counting"; }
    Tensor predict(const PredictRequest& r) const override {
        ++calls[r.timestep];
        return Tensor(r.latent->shape(), r.latent->kind(), 0.0);
    }
    mutable std::map<int, int> calls;
};

class ThrowingPredictor final : public NoisePredictor {
public:
    std::string name() const override { return "throwing"; }
    Tensor predict(const PredictRequest& r) const override {
        if (r.timestep == 40) throw std::runtime_error("out of memory");
        return Tensor(r.latent->shape(), r.latent->kind(), 0.0);
    }
};

class WrongShapePredictor final : public NoisePredictor {
public:
    std::string name() const override { return "wrong-shape"; }
    Tensor predict(const PredictRequest&) const override { return Tensor({1, 1, 1}); }
};

double text_bias(const std::string& text) {
    const auto e = ToyHashTextEncoder{}.encode(text);
    return 0.1 * std::accumulate(e.begin(), e.end(), 0.0) / static_cast<double>(e.size());
}

std::vector<std::size_t> iota_vec(std::size_t n) {
    std::vector<std::size_t> v(n);
    std::iota(v.begin(), v.end(), std::size_t{0});
    return v;
}

}  // namespace

TEST_CASE("default grid sizes") {
    CHECK(default_grid(8) == std::pair{2, 2});
    CHECK(default_grid(36) == std::pair{3, 3});
    CHECK(default_grid(90) == std::pair{3, 3});
    EditConfig c;
    c.grid_rows = 1;
    c.grid_cols = 4;
    CHECK(resolve_grid(c, 8) == std::pair{1, 4});
    c.grid_cols = 0;
    CHECK_THROWS_AS(resolve_grid(c, 8), Error);
}

TEST_CASE("inversion then sampling with constant noise restores the latents") {
    const DiffusionSchedule sched = make_schedule({});
    const ConstantNoisePredictor predictor(0.2);
    const Rig rig;
    const LatentStore source = random_latents(8, {6, 5, 3}, 12);
    EditConfig cfg = config(0, false);
    LatentStore z = invert_video(source, nullptr, rig.with(predictor), sched, cfg, 5, 6);
    GridContext grid;
    grid.layout = {2, 2, 5, 6};
    const PermutationSource order = [&](SamplingPhase, int t) { return identity_permutation(z.size(), t); };
    const std::vector<double> e(64, 0.0);
    sample_latents(z, grid, predictor, sched, e, e, {7.5}, order);
    for (std::size_t k = 0; k < 8; ++k) CHECK(max_abs_diff(z[k], source[k]) < 1e-6);
}

TEST_CASE("inversion with zero noise scales each latent by sqrt(alpha_bar_T)") {
    // Each inversion step multiplies by sqrt(a_t / a_prev); from the clean
    // boundary (a = 1) this telescopes to sqrt(a_T).
    const DiffusionSchedule sched = make_schedule({});
    const ConstantNoisePredictor predictor(0.0);
    const Rig rig;
    const LatentStore source = random_latents(8, {2, 2, 3}, 2);
    const LatentStore z = invert_video(source, nullptr, rig.with(predictor), sched, config(0, false), 2, 2);
    const double factor = std::sqrt(sched.alpha_bar(sched.timesteps().front()));
    for (std::size_t k = 0; k < 8; ++k)
        for (std::size_t i = 0; i < z[k].size(); ++i)
            CHECK(z[k].values()[i] == doctest::Approx(source[k].values()[i] * factor).epsilon(1e-12));
}

TEST_CASE("inversion of 8 frames in 2x2 processes two grids per timestep") {
    const DiffusionSchedule sched = make_schedule({});
    const CountingPredictor predictor;
    const Rig rig;
    (void)invert_video(random_latents(8, {2, 2, 3}, 1), nullptr, rig.with(predictor), sched, config(0, false), 2, 2);
    CHECK(predictor.calls.size() == 50);
    for (const auto& [t, n] : predictor.calls) CHECK(n == 2);
}

TEST_CASE("invert_video pads to the grid size") {
    const DiffusionSchedule sched = make_schedule({1000, 5, 0.00085, 0.012, TimestepSpacing::kLeading});
    const ConstantNoisePredictor predictor(0.0);
    const Rig rig;
    const LatentStore z = invert_video(random_latents(10, {1, 1, 3}, 1), nullptr, rig.with(predictor), sched,
                                       config(0, false), 1, 1);
    CHECK(z.size() == 18);
    CHECK(z[17] == z[9]);
}

TEST_CASE("separable predictor: shuffling is a no-op") {
    const Rig rig;
    const SeparableToyPredictor predictor;
    for (const std::size_t k : {8u, 13u, 36u}) {
        const Video v = moving_blob_video(k, 8, 6, 0.5);
        const Video on = edit_video(v, config(9, true), rig.with(predictor)).video;
        const Video off = edit_video(v, config(9, false), rig.with(predictor)).video;
        CHECK(on == off);
        CHECK(on.frame_count() == k);
    }
}

TEST_CASE("coupled predictor: shuffling changes the output and lowers across-frame spread") {
    const Rig rig;
    const CouplingToyPredictor predictor(0.5);
    const Video v = moving_blob_video(36, 8, 6, 0.3);
    const Video off = edit_video(v, config(4, false, 50), rig.with(predictor)).video;
    for (const std::uint64_t seed : {4u, 5u, 6u}) {
        const Video on = edit_video(v, config(seed, true, 50), rig.with(predictor)).video;
        CHECK_FALSE(on == off);
        CHECK(across_frame_std(on.frames()) < across_frame_std(off.frames()));
    }
}

TEST_CASE("coupled predictor: a single grid makes shuffling a relabelling") {
    const Rig rig;
    const CouplingToyPredictor predictor(0.5);
    const Video v = moving_blob_video(9, 8, 6, 0.3);
    EditConfig on = config(1, true), off = config(1, false);
    on.grid_rows = on.grid_cols = off.grid_rows = off.grid_cols = 3;
    CHECK(edit_video(v, on, rig.with(predictor)).video == edit_video(v, off, rig.with(predictor)).video);
}

TEST_CASE("coupled edit matches a direct simulation of the linear recursion") {
    // 1x1 RGB frames, no conditioning: every channel is an independent scalar
    // per frame, and the recursion can be written out by hand.
    const Rig rig;
    const double lambda = 0.5;
    const CouplingToyPredictor predictor(lambda);
    const std::size_t k = 14;
    const Video v = rave::testing::random_video(k, 1, 1, 77);
    EditConfig cfg = config(31, true, 12);
    cfg.condition.reset();
    cfg.grid_rows = cfg.grid_cols = 2;
    const EditResult result = edit_video(v, cfg, rig.with(predictor));
    const DiffusionSchedule sched = make_schedule(cfg.schedule);
    auto a = [&](int t) { return sched.alpha_bar(t); };
    const std::size_t n = 4, padded = 16;
    const double s = cfg.guidance;
    const double bu = text_bias(""), bc = text_bias(cfg.prompt), bi = text_bias(cfg.inversion_prompt);

    for (int c = 0; c < 3; ++c) {
        std::vector<double> z(padded);
        for (std::size_t f = 0; f < padded; ++f) z[f] = v.frame(std::min(f, k - 1)).at(0, 0, c);
        auto group_means = [&](const std::vector<std::size_t>& order) {
            std::vector<double> m(padded);
            for (std::size_t g = 0; g < padded; g += n) {
                double sum = 0.0;
                for (std::size_t j = 0; j < n; ++j) sum += z[order[g + j]];
                for (std::size_t j = 0; j < n; ++j) m[order[g + j]] = sum / n;
            }
            return m;
        };
        // Inversion on sequential groups.
        const auto& ts = sched.timesteps();
        for (auto it = ts.rbegin(); it != ts.rend(); ++it) {
            const int t = *it, tp = sched.previous(t);
            const auto m = group_means(iota_vec(padded));
            for (std::size_t f = 0; f < padded; ++f) {
                const double e = lambda * (z[f] - m[f]) + bi;
                z[f] = std::sqrt(a(t)) * (z[f] - std::sqrt(1 - a(tp)) * e) / std::sqrt(a(tp)) + std::sqrt(1 - a(t)) * e;
            }
        }
        // Sampling with the recorded permutations.
        std::size_t step = 0;
        for (const int t : ts) {
            const int tp = sched.previous(t);
            const auto& rec = result.manifest.permutations.at(step++);
            REQUIRE(rec.phase == SamplingPhase::kSampling);
            REQUIRE(rec.permutation.timestep == t);
            const auto m = group_means(rec.permutation.forward);
            for (std::size_t f = 0; f < padded; ++f) {
                const double eu = lambda * (z[f] - m[f]) + bu;
                const double ec = lambda * (z[f] - m[f]) + bc;
                const double e = eu + s * (ec - eu);
                z[f] = std::sqrt(a(tp)) * (z[f] - std::sqrt(1 - a(t)) * e) / std::sqrt(a(t)) + std::sqrt(1 - a(tp)) * e;
            }
        }
        for (std::size_t f = 0; f < k; ++f) CHECK(result.video.frame(f).at(0, 0, c) == doctest::Approx(z[f]).epsilon(1e-10));
    }
}

TEST_CASE("output frame count equals input for padded layouts") {
    const Rig rig;
    const SeparableToyPredictor predictor;
    for (const std::size_t k : {1u, 5u, 10u, 17u}) {
        const Video v = moving_blob_video(k, 4, 4, 0.2);
        const EditResult r = edit_video(v, config(2, true, 5), rig.with(predictor));
        CHECK(r.video.frame_count() == k);
        CHECK(r.manifest.padded_count == plan_padding(k, 9).padded_count);
    }
}

TEST_CASE("each timestep draws a fresh recorded permutation") {
    const Rig rig;
    const SeparableToyPredictor predictor;
    const EditResult r = edit_video(moving_blob_video(36, 4, 4, 0.2), config(8, true, 10), rig.with(predictor));
    REQUIRE(r.manifest.permutations.size() == 10);
    const auto sched = make_schedule(r.manifest.config.schedule);
    int distinct = 0;
    for (std::size_t i = 0; i < 10; ++i) {
        const auto& p = r.manifest.permutations[i];
        CHECK(p.permutation.timestep == sched.timesteps()[i]);
        CHECK(p.permutation.seed == 8);
        CHECK(is_bijection(p.permutation.forward));
        if (i > 0 && p.permutation.forward != r.manifest.permutations[i - 1].permutation.forward) ++distinct;
    }
    CHECK(distinct == 9);

    const EditResult off = edit_video(moving_blob_video(36, 4, 4, 0.2), config(8, false, 10), rig.with(predictor));
    for (const auto& p : off.manifest.permutations) CHECK(p.permutation.forward == iota_vec(36));
}

TEST_CASE("identical seeds give identical outputs") {
    const Rig rig;
    const CouplingToyPredictor predictor;
    const Video v = moving_blob_video(12, 6, 6, 0.4);
    const auto a = edit_video(v, config(77, true), rig.with(predictor));
    const auto b = edit_video(v, config(77, true), rig.with(predictor));
    CHECK(a.video == b.video);
    CHECK(a.manifest.output_digest == b.manifest.output_digest);
    const auto c = edit_video(v, config(78, true), rig.with(predictor));
    CHECK_FALSE(a.video == c.video);
}

TEST_CASE("manifest JSON round trip") {
    const Rig rig;
    const CouplingToyPredictor predictor;
    EditConfig cfg = config(5, true, 6);
    cfg.shuffle_inversion = true;
    cfg.inversion_prompt = "a photo";
    auto r = edit_video(moving_blob_video(10, 6, 4, 0.4), cfg, rig.with(predictor));
    r.manifest.artifacts["output"] = "out/";
    const RunManifest back = manifest_from_json(manifest_to_json(r.manifest));
    CHECK(back.config == r.manifest.config);
    CHECK(back.adapters == r.manifest.adapters);
    CHECK(back.permutations == r.manifest.permutations);
    CHECK(back.artifacts == r.manifest.artifacts);
    CHECK(back.input_digest == r.manifest.input_digest);
    CHECK(back.output_digest == r.manifest.output_digest);
    CHECK(back.padded_count == 18);
    CHECK(back.grid_rows == 3);
    CHECK(back.resolution == Resolution{6, 4});
    CHECK(r.manifest.permutations.size() == 12);
    CHECK(r.manifest.permutations.front().phase == SamplingPhase::kInversion);

    CHECK_THROWS_AS(manifest_from_json("{"), Error);
    CHECK_THROWS_AS(manifest_from_json("{\"version\": 2}"), Error);
}

TEST_CASE("replay reproduces runs and refuses altered ones") {
    const Rig rig;
    const CouplingToyPredictor predictor;
    const Video v = moving_blob_video(12, 6, 6, 0.4);
    const EditConfig cfg = config(21, true);
    const EditResult r = edit_video(v, cfg, rig.with(predictor));

    CHECK(replay(r.manifest, v, rig.with(predictor)) == r.video);
    CHECK(replay(r.manifest, v, rig.with(predictor), &cfg) == r.video);

    auto refused = [&](const RunManifest& m, const Adapters& a, const EditConfig* expected, const Video& input,
                       const char* field) {
        try {
            (void)replay(m, input, a, expected);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::kReplayMismatch);
            CHECK(std::string(e.what()).find(field) != std::string::npos);
            return;
        }
        FAIL("replay accepted a mismatch in " << field);
    };

    EditConfig seed = cfg;
    seed.seed = 22;
    refused(r.manifest, rig.with(predictor), &seed, v, "seed");
    EditConfig flipped = cfg;
    flipped.shuffle = false;
    refused(r.manifest, rig.with(predictor), &flipped, v, "shuffle");

    RunManifest tampered = r.manifest;
    tampered.config.seed = 99;
    refused(tampered, rig.with(predictor), nullptr, v, "permutations");
    tampered = r.manifest;
    tampered.config.shuffle = false;
    refused(tampered, rig.with(predictor), nullptr, v, "permutations");
    tampered = r.manifest;
    tampered.output_digest = "0000000000000000";
    refused(tampered, rig.with(predictor), nullptr, v, "output_digest");

    const CouplingToyPredictor other(0.25);
    refused(r.manifest, rig.with(other), nullptr, v, "adapters.predictor");
    refused(r.manifest, rig.with(predictor), nullptr, moving_blob_video(12, 6, 6, 0.5), "input_digest");
}

TEST_CASE("config_differences lists every differing field") {
    EditConfig a, b;
    CHECK(config_differences(a, b).empty());
    b.seed = 3;
    b.guidance = 1.0;
    b.condition.reset();
    const auto d = config_differences(a, b);
    CHECK(d.size() == 3);
}

TEST_CASE("predictor failures carry phase and timestep") {
    const Rig rig;
    const ThrowingPredictor predictor;
    try {
        (void)edit_video(moving_blob_video(8, 4, 4, 0.1), config(0, true, 50), rig.with(predictor));
        FAIL("expected failure");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::kAdapter);
        const std::string msg = e.what();
        CHECK(msg.find("inversion") != std::string::npos);
        CHECK(msg.find("timestep 40") != std::string::npos);
        CHECK(msg.find("out of memory") != std::string::npos);
    }
    const WrongShapePredictor wrong;
    CHECK_THROWS_AS((void)edit_video(moving_blob_video(8, 4, 4, 0.1), config(0, true, 5), rig.with(wrong)), Error);
}

TEST_CASE("supplied conditions are used instead of extraction") {
    const Rig rig;
    const SeparableToyPredictor predictor;
    const Video v = moving_blob_video(8, 6, 6, 0.4);
    const auto maps = extract_conditions(v, rig.extractor);
    const EditResult fresh = edit_video(v, config(1, true), rig.with(predictor));
    const EditResult supplied = edit_video(v, config(1, true), rig.with(predictor), &maps);
    CHECK(fresh.video == supplied.video);
    CHECK(supplied.manifest.adapters.extractor == "precomputed:toy-edge");
    CHECK(fresh.manifest.adapters.extractor == "toy-edge");
    CHECK(replay(supplied.manifest, v, rig.with(predictor), nullptr, &maps) == supplied.video);
}

TEST_CASE("conditions change the separable prediction") {
    const Rig rig;
    const SeparableToyPredictor predictor;
    const Video v = moving_blob_video(8, 6, 6, 0.4);
    EditConfig none = config(1, true);
    none.condition.reset();
    CHECK_FALSE(edit_video(v, none, rig.with(predictor)).video == edit_video(v, config(1, true), rig.with(predictor)).video);
}

TEST_CASE("invert_only records inversion and the latent digest") {
    const Rig rig;
    const ConstantNoisePredictor predictor(0.0);
    const Video v = moving_blob_video(8, 4, 4, 0.4);
    const InversionResult r = invert_only(v, config(1, true, 10), rig.with(predictor));
    CHECK(r.latents.size() == 8);
    CHECK(r.manifest.permutations.empty());
    CHECK(r.manifest.output_digest == latent_digest(r.latents));
    const double factor = std::sqrt(make_schedule(r.manifest.config.schedule).alpha_bar(900));
    CHECK(r.latents[3].at(1, 1, 0) == doctest::Approx(v.frame(3).at(1, 1, 0) * factor).epsilon(1e-12));
}

TEST_CASE("latent peak memory does not grow with the number of steps") {
    const Rig rig;
    const CouplingToyPredictor predictor;
    const Video v = moving_blob_video(45, 4, 4, 0.1);
    std::vector<std::size_t> peaks;
    for (const int steps : {3, 30}) {
        const std::size_t base = memory::usage(MemoryKind::kLatent).live_bytes;
        memory::reset_peak(MemoryKind::kLatent);
        (void)edit_video(v, config(1, true, steps), rig.with(predictor));
        peaks.push_back(memory::usage(MemoryKind::kLatent).peak_bytes - base);
    }
    CHECK(peaks[0] == peaks[1]);
    CHECK(peaks[1] <= (45 + 5 * 9) * 4 * 4 * 3 * sizeof(double));
}

TEST_CASE("edit_video validates its inputs") {
    const Rig rig;
    const SeparableToyPredictor predictor;
    Adapters missing = rig.with(predictor);
    missing.codec = nullptr;
    CHECK_THROWS_AS(edit_video(moving_blob_video(8, 4, 4, 0.1), config(0, true), missing), Error);
    const BlockAverageCodec block(3);
    Adapters blocky = rig.with(predictor);
    blocky.codec = &block;
    CHECK_THROWS_AS(edit_video(moving_blob_video(8, 4, 4, 0.1), config(0, true), blocky), Error);
    Adapters no_extractor = rig.with(predictor);
    no_extractor.extractor = nullptr;
    CHECK_THROWS_AS(edit_video(moving_blob_video(8, 4, 4, 0.1), config(0, true), no_extractor), Error);
}

TEST_CASE("block-average codec runs end to end") {
    const Rig rig;
    const SeparableToyPredictor predictor;
    const BlockAverageCodec block(2);
    Adapters a = rig.with(predictor);
    a.codec = &block;
    const EditResult r = edit_video(moving_blob_video(8, 8, 6, 0.1), config(0, true, 5), a);
    CHECK(r.video.width() == 8);
    CHECK(r.video.height() == 6);
    CHECK(r.manifest.adapters.codec == "block-average:2");
}
