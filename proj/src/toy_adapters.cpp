// Copyright (C) 2026 The RAVE Authors
// SPDX-License-Identifier: Apache-2.0

#include "rave/toy_adapters.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <charconv>

#include "rave/error.hpp"

namespace rave {

std::vector<double> toy_text_histogram(const std::string& text, int dims) {
    std::vector<double> hist(static_cast<std::size_t>(dims), 0.0);
    for (unsigned char ch : text) {
        std::uint64_t h = 1469598103934665603ULL;
        h ^= ch;
        h *= 1099511628211ULL;
        hist[h % static_cast<std::uint64_t>(dims)] += 1.0;
    }
    double norm = 0.0;
    for (double v : hist) norm += v * v;
    if (norm > 0.0) {
        norm = std::sqrt(norm);
        for (double& v : hist) v /= norm;
    }
    return hist;
}

namespace {

double text_mean(std::span<const double> embedding) {
    if (embedding.empty()) return 0.0;
    double sum = 0.0;
    for (double v : embedding) sum += v;
    return sum / static_cast<double>(embedding.size());
}

double condition_at(const PredictRequest& r, int y, int x) {
    return r.condition == nullptr ? 0.0 : r.condition->at(y, x, 0);
}

// Shortest representation that parses back to the same double.
std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

std::string ConstantNoisePredictor::name() const { return "constant:" + format_double(value_); }

Tensor ConstantNoisePredictor::predict(const PredictRequest& request) const {
    return Tensor(request.latent->shape(), request.latent->kind(), value_);
}

Tensor SeparableToyPredictor::predict(const PredictRequest& request) const {
    const Tensor& z = *request.latent;
    const double bias = 0.1 * text_mean(request.text_embedding);
    Tensor out(z.shape(), z.kind());
    for (int y = 0; y < z.height(); ++y)
        for (int x = 0; x < z.width(); ++x) {
            const double cond = 0.2 * condition_at(request, y, x);
            for (int c = 0; c < z.channels(); ++c) out.at(y, x, c) = 0.3 * z.at(y, x, c) + cond + bias;
        }
    return out;
}

std::string CouplingToyPredictor::name() const { return "toy-coupled:" + format_double(coupling_); }

Tensor CouplingToyPredictor::predict(const PredictRequest& request) const {
    const Tensor& z = *request.latent;
    const GridLayout& g = request.layout;
    const double bias = 0.1 * text_mean(request.text_embedding);
    const auto cells = static_cast<std::size_t>(g.cells());
    Tensor out(z.shape(), z.kind());
    std::vector<double> column(cells);
    for (int y = 0; y < g.cell_height; ++y)
        for (int x = 0; x < g.cell_width; ++x)
            for (int c = 0; c < z.channels(); ++c) {
                for (std::size_t j = 0; j < cells; ++j) {
                    const int r = static_cast<int>(j) / g.cols;
                    const int col = static_cast<int>(j) % g.cols;
                    column[j] = z.at(r * g.cell_height + y, col * g.cell_width + x, c);
                }
                std::sort(column.begin(), column.end());
                double sum = 0.0;
                for (double v : column) sum += v;
                const double mean = sum / static_cast<double>(cells);
                for (std::size_t j = 0; j < cells; ++j) {
                    const int gy = static_cast<int>(j) / g.cols * g.cell_height + y;
                    const int gx = static_cast<int>(j) % g.cols * g.cell_width + x;
                    const double v = z.at(gy, gx, c);
                    out.at(gy, gx, c) =
                        coupling_ * (v - mean) + 0.2 * condition_at(request, gy, gx) + bias;
                }
            }
    return out;
}

std::unique_ptr<NoisePredictor> make_toy_predictor(const std::string& name) {
    auto parse_tail = [&](const std::string& prefix) -> double {
        try {
            std::size_t used = 0;
            const std::string tail = name.substr(prefix.size());
            const double v = std::stod(tail, &used);
            if (used == tail.size()) return v;
        } catch (const std::logic_error&) {
        }
        fail(ErrorCode::kInvalidArgument, "malformed predictor name '" + name + "'");
    };
    if (name == "toy-separable") return std::make_unique<SeparableToyPredictor>();
    if (name == "toy-coupled") return std::make_unique<CouplingToyPredictor>();
    if (name.rfind("toy-coupled:", 0) == 0) return std::make_unique<CouplingToyPredictor>(parse_tail("toy-coupled:"));
    if (name.rfind("constant:", 0) == 0) return std::make_unique<ConstantNoisePredictor>(parse_tail("constant:"));
    fail(ErrorCode::kInvalidArgument, "unknown predictor '" + name + "'");
}

}  // namespace rave
