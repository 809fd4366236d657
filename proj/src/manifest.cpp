// Copyright (C) 2026 The RAVE Authors
// SPDX-License-Identifier: Apache-2.0

#include <json.hpp>

#include "rave/error.hpp"
#include "rave/sampler.hpp"

using nlohmann::json;

namespace rave {
namespace {

const char* phase_name(SamplingPhase p) { return p == SamplingPhase::kInversion ? "inversion" : "sampling"; }

SamplingPhase parse_phase(const std::string& s) {
    if (s == "inversion") return SamplingPhase::kInversion;
    if (s == "sampling") return SamplingPhase::kSampling;
    fail(ErrorCode::kSchema, "unknown permutation phase '" + s + "'");
}

json config_to_json(const EditConfig& c) {
    return {
        {"grid", {c.grid_rows, c.grid_cols}},
        {"steps", c.schedule.sampling_steps},
        {"train_steps", c.schedule.train_steps},
        {"beta_start", c.schedule.beta_start},
        {"beta_end", c.schedule.beta_end},
        {"spacing", c.schedule.spacing == TimestepSpacing::kLeading ? "leading" : "trailing"},
        {"guidance", c.guidance},
        {"shuffle", c.shuffle},
        {"shuffle_inversion", c.shuffle_inversion},
        {"seed", c.seed},
        {"prompt", c.prompt},
        {"inversion_prompt", c.inversion_prompt},
        {"condition", c.condition ? json(to_string(*c.condition)) : json(nullptr)},
    };
}

EditConfig config_from_json(const json& j) {
    EditConfig c;
    c.grid_rows = j.at("grid").at(0).get<int>();
    c.grid_cols = j.at("grid").at(1).get<int>();
    c.schedule.sampling_steps = j.at("steps").get<int>();
    c.schedule.train_steps = j.at("train_steps").get<int>();
    c.schedule.beta_start = j.at("beta_start").get<double>();
    c.schedule.beta_end = j.at("beta_end").get<double>();
    const auto spacing = j.at("spacing").get<std::string>();
    if (spacing != "leading" && spacing != "trailing") fail(ErrorCode::kSchema, "unknown spacing '" + spacing + "'");
    c.schedule.spacing = spacing == "leading" ? TimestepSpacing::kLeading : TimestepSpacing::kTrailing;
    c.guidance = j.at("guidance").get<double>();
    c.shuffle = j.at("shuffle").get<bool>();
    c.shuffle_inversion = j.at("shuffle_inversion").get<bool>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.prompt = j.at("prompt").get<std::string>();
    c.inversion_prompt = j.at("inversion_prompt").get<std::string>();
    const json& cond = j.at("condition");
    if (cond.is_null()) c.condition.reset();
    else c.condition = parse_condition_kind(cond.get<std::string>());
    return c;
}

}  // namespace

std::string manifest_to_json(const RunManifest& m, int indent) {
    json perms = json::array();
    for (const auto& r : m.permutations) {
        perms.push_back({{"phase", phase_name(r.phase)},
                         {"timestep", r.permutation.timestep},
                         {"seed", r.permutation.seed},
                         {"forward", r.permutation.forward}});
    }
    json doc = {
        {"version", m.version},
        {"config", config_to_json(m.config)},
        {"adapters",
         {{"codec", m.adapters.codec},
          {"predictor", m.adapters.predictor},
          {"extractor", m.adapters.extractor},
          {"text_encoder", m.adapters.text_encoder}}},
        {"input",
         {{"frames", m.frame_count},
          {"width", m.resolution.width},
          {"height", m.resolution.height},
          {"digest", m.input_digest}}},
        {"grid", {{"rows", m.grid_rows}, {"cols", m.grid_cols}, {"padded_frames", m.padded_count}}},
        {"permutations", perms},
        {"timings_ms",
         {{"preprocess", m.timings.preprocess_ms},
          {"inversion", m.timings.inversion_ms},
          {"sampling", m.timings.sampling_ms},
          {"decode", m.timings.decode_ms}}},
        {"artifacts", m.artifacts},
        {"output_digest", m.output_digest},
    };
    return doc.dump(indent);
}

RunManifest manifest_from_json(const std::string& text) {
    try {
        const json doc = json::parse(text);
        RunManifest m;
        m.version = doc.at("version").get<int>();
        if (m.version != 1) fail(ErrorCode::kSchema, "unsupported manifest version " + std::to_string(m.version));
        m.config = config_from_json(doc.at("config"));
        const json& a = doc.at("adapters");
        m.adapters = {a.at("codec").get<std::string>(), a.at("predictor").get<std::string>(),
                      a.at("extractor").get<std::string>(), a.at("text_encoder").get<std::string>()};
        const json& in = doc.at("input");
        m.frame_count = in.at("frames").get<std::size_t>();
        m.resolution = {in.at("width").get<int>(), in.at("height").get<int>()};
        m.input_digest = in.at("digest").get<std::string>();
        const json& g = doc.at("grid");
        m.grid_rows = g.at("rows").get<int>();
        m.grid_cols = g.at("cols").get<int>();
        m.padded_count = g.at("padded_frames").get<std::size_t>();
        for (const json& r : doc.at("permutations")) {
            PermutationRecord rec;
            rec.phase = parse_phase(r.at("phase").get<std::string>());
            rec.permutation.timestep = r.at("timestep").get<int>();
            rec.permutation.seed = r.at("seed").get<std::uint64_t>();
            rec.permutation.forward = r.at("forward").get<std::vector<std::size_t>>();
            m.permutations.push_back(std::move(rec));
        }
        const json& t = doc.at("timings_ms");
        m.timings = {t.at("preprocess").get<double>(), t.at("inversion").get<double>(),
                     t.at("sampling").get<double>(), t.at("decode").get<double>()};
        m.artifacts = doc.value("artifacts", std::map<std::string, std::string>{});
        m.output_digest = doc.at("output_digest").get<std::string>();
        return m;
    } catch (const json::exception& e) {
        fail(ErrorCode::kSchema, std::string("malformed run manifest: ") + e.what());
    }
}

}  // namespace rave
