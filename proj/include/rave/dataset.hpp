// Copyright (C) 2026 The RAVE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rave/video_io.hpp"

namespace rave::dataset {

enum class EditType { kLocal, kVisualStyle, kBackground, kShapeAttribute, kExtremeShape };
enum class MotionTag { kExo, kEgo, kEgoExo, kOcclusion, kMultiObject };

std::string to_string(EditType t);
std::string to_string(MotionTag t);

struct PromptEntry {
    std::string text;
    EditType edit_type = EditType::kLocal;
    friend bool operator==(const PromptEntry&, const PromptEntry&) = default;
};

struct VideoEntry {
    std::string id;
    std::string source;
    int frame_count = 0;
    Resolution resolution;
    std::vector<MotionTag> motion_tags;
    std::vector<PromptEntry> prompts;
    friend bool operator==(const VideoEntry&, const VideoEntry&) = default;
};

struct DatasetManifest {
    std::string name;
    std::string version;
    std::vector<VideoEntry> videos;
    friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

/// Frame counts of the standard evaluation buckets; others only warn.
inline constexpr int kLengthBuckets[] = {8, 36, 90};

struct Issue {
    std::string pointer;  // JSON pointer, e.g. "/videos/3/prompts/0/edit_type"
    std::string message;
};

struct ValidationResult {
    std::vector<Issue> errors;
    std::vector<Issue> warnings;
    bool ok() const { return errors.empty(); }
};

/// Validates a manifest document, collecting every violation.
ValidationResult validate_json(const std::string& text);

/// Parses and validates; throws kSchema listing every error.
DatasetManifest parse_manifest(const std::string& text);
DatasetManifest load_manifest(const std::filesystem::path& path);

std::string manifest_to_json(const DatasetManifest& manifest, int indent = 2);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

struct Summary {
    std::size_t videos = 0;
    std::size_t pairs = 0;
    std::map<int, std::size_t> videos_by_length;
    std::map<std::string, std::size_t> prompts_by_edit_type;
    std::map<std::string, std::size_t> videos_by_motion;
};

Summary summarize(const DatasetManifest& manifest);
std::string summary_to_json(const Summary& summary, int indent = 2);
std::string validation_to_json(const ValidationResult& result, int indent = 2);

}  // namespace rave::dataset
