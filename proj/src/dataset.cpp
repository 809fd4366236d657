// Copyright (C) 2026 The RAVE Authors
// SPDX-License-Identifier: Apache-2.0

#include "rave/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "rave/error.hpp"

using nlohmann::json;

namespace rave::dataset {
namespace {

constexpr std::pair<EditType, const char*> kEditTypes[] = {
    {EditType::kLocal, "local"},
    {EditType::kVisualStyle, "visual-style"},
    {EditType::kBackground, "background"},
    {EditType::kShapeAttribute, "shape-attribute"},
    {EditType::kExtremeShape, "extreme-shape"},
};

constexpr std::pair<MotionTag, const char*> kMotionTags[] = {
    {MotionTag::kExo, "exo"},
    {MotionTag::kEgo, "ego"},
    {MotionTag::kEgoExo, "ego-exo"},
    {MotionTag::kOcclusion, "occlusion"},
    {MotionTag::kMultiObject, "multi-object"},
};

template <typename E, std::size_t N>
std::optional<E> lookup(const std::pair<E, const char*> (&table)[N], const std::string& s) {
    for (const auto& [value, name] : table)
        if (s == name) return value;
    return std::nullopt;
}

template <typename E, std::size_t N>
std::string allowed(const std::pair<E, const char*> (&table)[N]) {
    std::string out;
    for (const auto& [value, name] : table) out += (out.empty() ? "" : ", ") + std::string(name);
    return out;
}

/// Walks a parsed document, recording issues and building the manifest.
class Validator {
public:
    ValidationResult result;
    DatasetManifest manifest;

    void run(const json& doc) {
        if (!doc.is_object()) return error("", "manifest must be a JSON object");
        manifest.name = string_field(doc, "", "name");
        manifest.version = string_field(doc, "", "version");
        if (!doc.contains("videos")) return error("/videos", "missing required field");
        const json& videos = doc["videos"];
        if (!videos.is_array()) return error("/videos", "must be an array");
        std::unordered_map<std::string, std::size_t> first_seen;
        for (std::size_t i = 0; i < videos.size(); ++i) {
            const std::string ptr = "/videos/" + std::to_string(i);
            VideoEntry v = video(videos[i], ptr);
            if (!v.id.empty()) {
                auto [it, inserted] = first_seen.emplace(v.id, i);
                if (!inserted)
                    error(ptr + "/id", "duplicate id '" + v.id + "' (also /videos/" + std::to_string(it->second) + "/id)");
            }
            manifest.videos.push_back(std::move(v));
        }
    }

private:
    void error(const std::string& ptr, const std::string& msg) { result.errors.push_back({ptr, msg}); }
    void warn(const std::string& ptr, const std::string& msg) { result.warnings.push_back({ptr, msg}); }

    std::string string_field(const json& obj, const std::string& ptr, const char* key, bool nonempty = true) {
        const std::string p = ptr + "/" + key;
        if (!obj.contains(key)) {
            error(p, "missing required field");
            return {};
        }
        if (!obj[key].is_string()) {
            error(p, "must be a string");
            return {};
        }
        std::string s = obj[key].get<std::string>();
        if (nonempty && s.empty()) error(p, "must not be empty");
        return s;
    }

    VideoEntry video(const json& v, const std::string& ptr) {
        VideoEntry e;
        if (!v.is_object()) {
            error(ptr, "video entry must be an object");
            return e;
        }
        e.id = string_field(v, ptr, "id");
        e.source = string_field(v, ptr, "source");

        if (!v.contains("frame_count")) {
            error(ptr + "/frame_count", "missing required field");
        } else if (!v["frame_count"].is_number_integer() || v["frame_count"].get<long long>() < 1) {
            error(ptr + "/frame_count", "must be a positive integer");
        } else {
            e.frame_count = v["frame_count"].get<int>();
            if (std::find(std::begin(kLengthBuckets), std::end(kLengthBuckets), e.frame_count) == std::end(kLengthBuckets))
                warn(ptr + "/frame_count", "frame count " + std::to_string(e.frame_count) + " is outside the 8/36/90 buckets");
        }

        const std::string rptr = ptr + "/resolution";
        if (!v.contains("resolution")) {
            error(rptr, "missing required field");
        } else {
            const json& r = v["resolution"];
            if (!r.is_array() || r.size() != 2 || !r[0].is_number_integer() || !r[1].is_number_integer() ||
                r[0].get<long long>() < 1 || r[1].get<long long>() < 1) {
                error(rptr, "must be [width, height] with positive integers");
            } else {
                e.resolution = {r[0].get<int>(), r[1].get<int>()};
            }
        }

        const std::string mptr = ptr + "/motion_tags";
        if (v.contains("motion_tags")) {
            const json& tags = v["motion_tags"];
            if (!tags.is_array()) {
                error(mptr, "must be an array");
            } else {
                for (std::size_t i = 0; i < tags.size(); ++i) {
                    const std::string tp = mptr + "/" + std::to_string(i);
                    auto tag = tags[i].is_string() ? lookup(kMotionTags, tags[i].get<std::string>()) : std::nullopt;
                    if (!tag) {
                        error(tp, "unknown motion tag; expected one of " + allowed(kMotionTags));
                    } else if (std::find(e.motion_tags.begin(), e.motion_tags.end(), *tag) != e.motion_tags.end()) {
                        error(tp, "repeated motion tag");
                    } else {
                        e.motion_tags.push_back(*tag);
                    }
                }
            }
        }

        const std::string pptr = ptr + "/prompts";
        if (!v.contains("prompts")) {
            error(pptr, "missing required field");
        } else if (!v["prompts"].is_array()) {
            error(pptr, "must be an array");
        } else if (v["prompts"].empty()) {
            error(pptr, "at least one prompt is required");
        } else {
            const json& prompts = v["prompts"];
            for (std::size_t i = 0; i < prompts.size(); ++i) {
                const std::string pp = pptr + "/" + std::to_string(i);
                if (!prompts[i].is_object()) {
                    error(pp, "prompt entry must be an object");
                    continue;
                }
                PromptEntry p;
                p.text = string_field(prompts[i], pp, "text");
                const std::string et = string_field(prompts[i], pp, "edit_type");
                if (auto t = lookup(kEditTypes, et)) {
                    p.edit_type = *t;
                } else if (!et.empty()) {
                    error(pp + "/edit_type", "unknown edit_type '" + et + "'; expected one of " + allowed(kEditTypes));
                }
                e.prompts.push_back(std::move(p));
            }
        }
        return e;
    }
};

std::string describe(const std::vector<Issue>& issues) {
    std::string out;
    for (const auto& i : issues) out += "\n  " + (i.pointer.empty() ? std::string("/") : i.pointer) + ": " + i.message;
    return out;
}

Validator validate_document(const std::string& text) {
    Validator v;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        v.result.errors.push_back({"", std::string("not valid JSON: ") + e.what()});
        return v;
    }
    v.run(doc);
    return v;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

std::string to_string(EditType t) {
    for (const auto& [value, name] : kEditTypes)
        if (value == t) return name;
    return "unknown";
}

std::string to_string(MotionTag t) {
    for (const auto& [value, name] : kMotionTags)
        if (value == t) return name;
    return "unknown";
}

ValidationResult validate_json(const std::string& text) { return validate_document(text).result; }

DatasetManifest parse_manifest(const std::string& text) {
    Validator v = validate_document(text);
    if (!v.result.ok()) fail(ErrorCode::kSchema, "invalid dataset manifest:" + describe(v.result.errors));
    return std::move(v.manifest);
}

DatasetManifest load_manifest(const std::filesystem::path& path) { return parse_manifest(read_file(path)); }

std::string manifest_to_json(const DatasetManifest& m, int indent) {
    json videos = json::array();
    for (const auto& v : m.videos) {
        json tags = json::array();
        for (auto t : v.motion_tags) tags.push_back(to_string(t));
        json prompts = json::array();
        for (const auto& p : v.prompts) prompts.push_back({{"text", p.text}, {"edit_type", to_string(p.edit_type)}});
        videos.push_back({{"id", v.id},
                          {"source", v.source},
                          {"frame_count", v.frame_count},
                          {"resolution", {v.resolution.width, v.resolution.height}},
                          {"motion_tags", tags},
                          {"prompts", prompts}});
    }
    return json{{"name", m.name}, {"version", m.version}, {"videos", videos}}.dump(indent);
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
    out << manifest_to_json(manifest) << "\n";
}

Summary summarize(const DatasetManifest& m) {
    Summary s;
    for (const auto& [value, name] : kEditTypes) s.prompts_by_edit_type[name] = 0;
    for (const auto& [value, name] : kMotionTags) s.videos_by_motion[name] = 0;
    for (int b : kLengthBuckets) s.videos_by_length[b] = 0;
    for (const auto& v : m.videos) {
        ++s.videos;
        s.pairs += v.prompts.size();
        ++s.videos_by_length[v.frame_count];
        for (auto t : v.motion_tags) ++s.videos_by_motion[to_string(t)];
        for (const auto& p : v.prompts) ++s.prompts_by_edit_type[to_string(p.edit_type)];
    }
    return s;
}

std::string summary_to_json(const Summary& s, int indent) {
    json lengths = json::object();
    for (const auto& [len, n] : s.videos_by_length) lengths[std::to_string(len)] = n;
    return json{{"videos", s.videos},
                {"pairs", s.pairs},
                {"videos_by_length", lengths},
                {"prompts_by_edit_type", s.prompts_by_edit_type},
                {"videos_by_motion", s.videos_by_motion}}
        .dump(indent);
}

std::string validation_to_json(const ValidationResult& r, int indent) {
    auto issues = [](const std::vector<Issue>& list) {
        json a = json::array();
        for (const auto& i : list) a.push_back({{"pointer", i.pointer}, {"message", i.message}});
        return a;
    };
    return json{{"valid", r.ok()}, {"errors", issues(r.errors)}, {"warnings", issues(r.warnings)}}.dump(indent);
}

}  // namespace rave::dataset
