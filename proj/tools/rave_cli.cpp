// Copyright (C) 2026 The RAVE Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Talks to the library exclusively through rave.h.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rave/rave.h"

namespace fs = std::filesystem;

namespace {

struct CliError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void check(rave_status st, const std::string& what) {
    if (st != RAVE_OK)
        throw CliError(what + ": " + rave_status_name(st) + (rave_last_error()[0] ? std::string(": ") + rave_last_error() : ""));
}

struct VideoDeleter {
    void operator()(rave_video* v) const { rave_video_free(v); }
};
struct RunDeleter {
    void operator()(rave_run* r) const { rave_run_free(r); }
};
using VideoPtr = std::unique_ptr<rave_video, VideoDeleter>;
using RunPtr = std::unique_ptr<rave_run, RunDeleter>;

std::string take_string(char* s) {
    std::string out = s ? s : "";
    rave_string_free(s);
    return out;
}

std::pair<int, int> parse_pair(const std::string& text, char sep, const char* what) {
    int a = 0, b = 0;
    char c = 0;
    std::istringstream in(text);
    if (!(in >> a >> c >> b) || (c != sep && c != 'X') || a < 1 || b < 1 || in.peek() != EOF)
        throw CliError(std::string("malformed ") + what + " '" + text + "'");
    return {a, b};
}

bool is_container(const fs::path& p) {
    auto ext = p.extension().string();
    return ext == ".mp4" || ext == ".mov" || ext == ".avi" || ext == ".mkv" || ext == ".webm";
}

int run_tool(const std::string& cmd) {
    const int rc = std::system(cmd.c_str());
    if (rc != 0) throw CliError("external command failed (" + std::to_string(rc) + "): " + cmd);
    return rc;
}

/// Container inputs are unpacked to a frame directory with ffmpeg.
fs::path frames_dir_for_input(const fs::path& input) {
    if (fs::is_directory(input) || !is_container(input)) return input;
    fs::path dir = input;
    dir += ".frames";
    fs::create_directories(dir);
    if (fs::is_empty(dir)) run_tool("ffmpeg -loglevel error -i \"" + input.string() + "\" \"" + (dir / "frame_%04d.png").string() + "\"");
    return dir;
}

void save_output(const rave_video* video, const fs::path& output) {
    if (!is_container(output)) {
        check(rave_video_save(video, output.c_str()), "saving frames");
        return;
    }
    fs::path dir = output;
    dir += ".frames";
    check(rave_video_save(video, dir.c_str()), "saving frames");
    run_tool("ffmpeg -loglevel error -y -framerate 24 -i \"" + (dir / "frame_%04d.png").string() +
             "\" -pix_fmt yuv420p \"" + output.string() + "\"");
}

VideoPtr load_video(const fs::path& input, const std::string& resolution) {
    int w = 0, h = 0;
    if (!resolution.empty()) std::tie(w, h) = parse_pair(resolution, 'x', "resolution");
    rave_video* v = nullptr;
    check(rave_video_load(frames_dir_for_input(input).c_str(), w, h, &v), "loading " + input.string());
    return VideoPtr(v);
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CliError("cannot write " + path.string());
    out << text << "\n";
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CliError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Options shared by edit and invert.
struct EditArgs {
    std::string input, output, prompt, inversion_prompt, grid, resolution;
    std::string condition = "toy-edge", codec = "identity", predictor = "toy-coupled", spacing = "leading";
    int steps = 50, train_steps = 1000;
    double guidance = 7.5, beta_start = 0.00085, beta_end = 0.012;
    std::uint64_t seed = 0;
    bool no_shuffle = false, shuffle_inversion = false, no_cache = false;

    void attach(CLI::App* app) {
        app->add_option("--input", input, "Frame directory or video file")->required();
        app->add_option("--output", output, "Output directory (or .mp4 file)")->required();
        app->add_option("--prompt", prompt, "Target text prompt");
        app->add_option("--inversion-prompt", inversion_prompt, "Prompt used during inversion");
        app->add_option("--grid", grid, "Grid size NxM (default 2x2 for 8 frames, 3x3 otherwise)");
        app->add_option("--resolution", resolution, "Resize frames to WxH");
        app->add_option("--steps", steps, "DDIM steps")->check(CLI::PositiveNumber);
        app->add_option("--train-steps", train_steps, "Training timesteps of the schedule")->check(CLI::PositiveNumber);
        app->add_option("--guidance", guidance, "Classifier-free guidance scale")->check(CLI::NonNegativeNumber);
        app->add_option("--beta-start", beta_start, "First beta of the scaled-linear schedule");
        app->add_option("--beta-end", beta_end, "Last beta of the scaled-linear schedule");
        app->add_option("--spacing", spacing, "Timestep spacing")->check(CLI::IsMember({"leading", "trailing"}));
        app->add_option("--seed", seed, "Seed for grid permutations");
        app->add_flag("--no-shuffle", no_shuffle, "Process fixed sequential grids (ablation)");
        app->add_flag("--shuffle-inversion", shuffle_inversion, "Also shuffle grids during inversion");
        app->add_option("--condition", condition, "Control condition kind")->check(CLI::IsMember({"depth", "lineart", "softedge", "toy-edge", "none"}));
        app->add_flag("--no-cache", no_cache, "Do not read or write cond_<kind>/ next to the input");
        app->add_option("--codec", codec, "identity | block-average:<f>");
        app->add_option("--predictor", predictor, "toy-coupled | toy-separable | constant:<c>");
    }

    rave_edit_options options(const std::string& cache_dir) const {
        rave_edit_options o;
        rave_edit_options_init(&o);
        if (!grid.empty()) std::tie(o.grid_rows, o.grid_cols) = parse_pair(grid, 'x', "grid");
        o.steps = steps;
        o.train_steps = train_steps;
        o.beta_start = beta_start;
        o.beta_end = beta_end;
        o.spacing = spacing == "trailing" ? RAVE_SPACING_TRAILING : RAVE_SPACING_LEADING;
        o.guidance = guidance;
        o.seed = seed;
        o.shuffle = no_shuffle ? 0 : 1;
        o.shuffle_inversion = shuffle_inversion ? 1 : 0;
        o.prompt = prompt.c_str();
        o.inversion_prompt = inversion_prompt.c_str();
        o.condition = condition.c_str();
        o.condition_cache_dir = cache_dir.empty() ? nullptr : cache_dir.c_str();
        o.codec = codec.c_str();
        o.predictor = predictor.c_str();
        return o;
    }
};

int cmd_edit(const EditArgs& a, bool invert_only) {
    VideoPtr video = load_video(a.input, a.resolution);
    const fs::path frames = frames_dir_for_input(a.input);
    const std::string cache = (a.no_cache || a.condition == "none" || !a.resolution.empty()) ? "" : frames.string();
    const rave_edit_options o = a.options(cache);
    const fs::path out(a.output);
    const fs::path manifest_dir = is_container(out) ? out.parent_path() : out;
    fs::create_directories(manifest_dir.empty() ? fs::path(".") : manifest_dir);

    rave_run* raw_run = nullptr;
    if (invert_only) {
        const fs::path latents = out / "inverted_latents.bin";
        check(rave_invert(video.get(), &o, nullptr, latents.c_str(), &raw_run), "inversion");
    } else {
        rave_video* edited = nullptr;
        check(rave_edit(video.get(), &o, nullptr, &edited, &raw_run), "edit");
        VideoPtr result(edited);
        save_output(result.get(), out);
        check(rave_run_set_artifact(raw_run, "output", out.c_str()), "manifest");
    }
    RunPtr run(raw_run);
    check(rave_run_set_artifact(run.get(), "input", fs::path(a.input).c_str()), "manifest");
    if (!cache.empty()) check(rave_run_set_artifact(run.get(), "condition_cache", cache.c_str()), "manifest");
    char* json = nullptr;
    check(rave_run_to_json(run.get(), &json), "manifest");
    const fs::path manifest_path = (manifest_dir.empty() ? fs::path(".") : manifest_dir) / "run.json";
    write_text(manifest_path, take_string(json));
    std::cout << (invert_only ? "inverted " : "edited ") << rave_video_frame_count(video.get()) << " frames -> "
              << out.string() << " (manifest " << manifest_path.string() << ")\n";
    return 0;
}

struct ReplayArgs {
    std::string manifest, input, output, resolution;
    std::optional<std::uint64_t> seed;
    bool no_shuffle = false, shuffle = false;
};

int cmd_replay(const ReplayArgs& a) {
    const std::string text = read_text(a.manifest);
    rave_run* raw = nullptr;
    check(rave_run_from_json(text.c_str(), &raw), "reading manifest");
    RunPtr run(raw);
    VideoPtr video = load_video(a.input, a.resolution);

    // Expected config: the recorded one with any overrides from the command line.
    const auto doc = nlohmann::json::parse(text);
    const auto& cfg = doc.at("config");
    std::string prompt = cfg.at("prompt"), inversion_prompt = cfg.at("inversion_prompt");
    std::string condition = cfg.at("condition").is_null() ? "none" : cfg.at("condition").get<std::string>();
    rave_edit_options o;
    rave_edit_options_init(&o);
    o.grid_rows = cfg.at("grid").at(0);
    o.grid_cols = cfg.at("grid").at(1);
    o.steps = cfg.at("steps");
    o.train_steps = cfg.at("train_steps");
    o.beta_start = cfg.at("beta_start");
    o.beta_end = cfg.at("beta_end");
    o.spacing = cfg.at("spacing") == "trailing" ? RAVE_SPACING_TRAILING : RAVE_SPACING_LEADING;
    o.guidance = cfg.at("guidance");
    o.seed = cfg.at("seed");
    o.shuffle = cfg.at("shuffle").get<bool>() ? 1 : 0;
    o.shuffle_inversion = cfg.at("shuffle_inversion").get<bool>() ? 1 : 0;
    o.prompt = prompt.c_str();
    o.inversion_prompt = inversion_prompt.c_str();
    o.condition = condition.c_str();
    o.codec = nullptr;
    o.predictor = nullptr;
    if (a.seed) o.seed = *a.seed;
    if (a.no_shuffle) o.shuffle = 0;
    if (a.shuffle) o.shuffle = 1;

    rave_video* edited = nullptr;
    check(rave_replay(video.get(), run.get(), &o, nullptr, &edited), "replay");
    VideoPtr result(edited);
    save_output(result.get(), a.output);
    std::cout << "replayed " << rave_video_frame_count(result.get()) << " frames bit-exactly -> " << a.output << "\n";
    return 0;
}

struct EvalArgs {
    std::string source, edited, prompt, report, resolution, flow = "block-match", label = "RAVE";
    bool table = false;
};

int cmd_eval(const EvalArgs& a) {
    VideoPtr source = load_video(a.source, a.resolution);
    VideoPtr edited = load_video(a.edited, a.resolution);
    rave_metrics m{};
    char* json = nullptr;
    check(rave_evaluate(source.get(), edited.get(), a.prompt.c_str(), "toy", a.flow.c_str(), &m, &json), "evaluation");
    const std::string report = take_string(json);
    if (!a.report.empty()) write_text(a.report, report);
    if (a.table) {
        char* row = nullptr;
        check(rave_format_table_row(&m, a.label.c_str(), &row), "table");
        std::cout << "| Method | CLIP-F (x10^-2) | WarpSSIM (x10^-2) | CLIP-T (x10^-2) | Q_edit (x10^-2) |\n"
                  << "|---|---|---|---|---|\n"
                  << take_string(row) << "\n";
    } else {
        std::cout << report << "\n";
    }
    return 0;
}

int cmd_dataset(const std::string& action, const std::string& path) {
    char* json = nullptr;
    const rave_status st = action == "validate" ? rave_dataset_validate(path.c_str(), &json)
                                                : rave_dataset_summarize(path.c_str(), &json);
    if (json) std::cout << take_string(json) << "\n";
    if (st != RAVE_OK) {
        std::cerr << "rave dataset " << action << ": " << rave_status_name(st) << ": " << rave_last_error() << "\n";
        return 1;
    }
    return 0;
}

/// Writes a synthetic clip: a bright disc drifting over a horizontal gradient.
int cmd_synth(const std::string& output, std::size_t frames, const std::string& resolution, double speed) {
    const auto [w, h] = parse_pair(resolution, 'x', "resolution");
    std::vector<double> pixels(frames * static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3);
    for (std::size_t k = 0; k < frames; ++k) {
        const double cx = w * 0.3 + speed * static_cast<double>(k);
        const double cy = h * 0.5;
        const double radius = std::min(w, h) * 0.2;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const double d = std::hypot(x - cx, y - cy);
                const double disc = 1.0 / (1.0 + std::exp((d - radius) * 0.8));
                const double base = -0.6 + 0.8 * x / std::max(1, w - 1);
                const std::size_t i = ((k * static_cast<std::size_t>(h) + static_cast<std::size_t>(y)) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)) * 3;
                pixels[i] = std::clamp(base + 1.2 * disc, -1.0, 1.0);
                pixels[i + 1] = std::clamp(base * 0.5 + 0.6 * disc, -1.0, 1.0);
                pixels[i + 2] = std::clamp(-base, -1.0, 1.0);
            }
    }
    rave_video* raw = nullptr;
    check(rave_video_create(frames, w, h, pixels.data(), &raw), "creating video");
    VideoPtr video(raw);
    check(rave_video_save(video.get(), output.c_str()), "saving frames");
    std::cout << "wrote " << frames << " frames to " << output << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rave: zero-shot video editing with shuffled grid sampling"};
    app.set_version_flag("--version", std::string(rave_version()));
    app.require_subcommand(1);

    EditArgs edit_args;
    auto* edit = app.add_subcommand("edit", "Edit a video with a text prompt");
    edit_args.attach(edit);

    EditArgs invert_args;
    auto* invert = app.add_subcommand("invert", "Run DDIM inversion only and store the noisy latents");
    invert_args.attach(invert);

    ReplayArgs replay_args;
    auto* replay = app.add_subcommand("replay", "Reproduce a recorded edit from its run.json");
    replay->add_option("--manifest", replay_args.manifest, "run.json written by edit")->required();
    replay->add_option("--input", replay_args.input, "Source frames used for the original run")->required();
    replay->add_option("--output", replay_args.output, "Output directory (or .mp4 file)")->required();
    replay->add_option("--resolution", replay_args.resolution, "Resize frames to WxH");
    replay->add_option("--seed", replay_args.seed, "Expected seed; refused if it differs from the record");
    auto* ns = replay->add_flag("--no-shuffle", replay_args.no_shuffle, "Expect an unshuffled run");
    replay->add_flag("--shuffle", replay_args.shuffle, "Expect a shuffled run")->excludes(ns);

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "Compute CLIP-F, CLIP-T, WarpSSIM and Q_edit");
    eval->add_option("--source", eval_args.source, "Source frames (flow is computed here)")->required();
    eval->add_option("--edited", eval_args.edited, "Edited frames")->required();
    eval->add_option("--prompt", eval_args.prompt, "Edit prompt for CLIP-T")->required();
    eval->add_option("--report", eval_args.report, "Write the MetricsReport JSON here");
    eval->add_option("--resolution", eval_args.resolution, "Resize both videos to WxH");
    eval->add_option("--flow", eval_args.flow, "block-match | zero | constant:<dx>,<dy>");
    eval->add_option("--label", eval_args.label, "Row label for --table");
    eval->add_flag("--table", eval_args.table, "Print a table row with values x100");

    auto* dataset = app.add_subcommand("dataset", "Dataset manifest tools");
    dataset->require_subcommand(1);
    std::string validate_path, summarize_path;
    auto* validate = dataset->add_subcommand("validate", "Check a manifest against the schema");
    validate->add_option("manifest", validate_path)->required();
    auto* summarize = dataset->add_subcommand("summarize", "Count videos, prompts and pairs");
    summarize->add_option("manifest", summarize_path)->required();

    std::string synth_out, synth_res = "64x48";
    std::size_t synth_frames = 8;
    double synth_speed = 1.0;
    auto* synth = app.add_subcommand("synth", "Write a synthetic test clip");
    synth->add_option("--output", synth_out, "Output frame directory")->required();
    synth->add_option("--frames", synth_frames, "Number of frames")->check(CLI::PositiveNumber);
    synth->add_option("--resolution", synth_res, "Frame size WxH");
    synth->add_option("--speed", synth_speed, "Horizontal motion in pixels per frame");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*edit) return cmd_edit(edit_args, false);
        if (*invert) return cmd_edit(invert_args, true);
        if (*replay) return cmd_replay(replay_args);
        if (*eval) return cmd_eval(eval_args);
        if (*validate) return cmd_dataset("validate", validate_path);
        if (*summarize) return cmd_dataset("summarize", summarize_path);
        if (*synth) return cmd_synth(synth_out, synth_frames, synth_res, synth_speed);
    } catch (const CliError& e) {
        std::cerr << "rave: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "rave: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
