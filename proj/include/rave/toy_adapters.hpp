// Copyright (C) 2026 The RAVE Authors
// SPDX-License-Identifier: Apache-2.0

// Deterministic stand-ins for the model adapters. They let the whole
// pipeline run without downloaded weights; their outputs carry no semantic
// meaning.

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rave/diffusion.hpp"

namespace rave {

/// Maps a prompt to a vector the denoiser conditions on.
class TextEncoder {
public:
    virtual ~TextEncoder() = default;
    virtual std::string name() const = 0;
    virtual std::vector<double> encode(const std::string& text) const = 0;
};

/// 64-bin histogram of FNV-1a hashed characters, L2-normalized. The empty
/// string maps to the zero vector.
std::vector<double> toy_text_histogram(const std::string& text, int dims = 64);

class ToyHashTextEncoder final : public TextEncoder {
public:
    std::string name() const override { return "toy-hash"; }
    std::vector<double> encode(const std::string& text) const override { return toy_text_histogram(text); }
};

/// eps_hat = c everywhere.
class ConstantNoisePredictor final : public NoisePredictor {
public:
    explicit ConstantNoisePredictor(double value) : value_(value) {}
    std::string name() const override;
    bool concurrent_safe() const override { return true; }
    Tensor predict(const PredictRequest& request) const override;

private:
    double value_;
};

/// eps_hat(x) depends only on the latent, condition and prompt values at x:
///   0.3 * z + 0.2 * cond + 0.1 * mean(text)
/// so shuffling frames between grids cannot change any frame's trajectory.
class SeparableToyPredictor final : public NoisePredictor {
public:
    std::string name() const override { return "toy-separable"; }
    bool concurrent_safe() const override { return true; }
    Tensor predict(const PredictRequest& request) const override;
};

/// Separable terms plus coupling * (z - mean over the grid's cells at the
/// same in-cell position). The mean sums sorted values, so it does not
/// depend on where frames sit inside the grid.
class CouplingToyPredictor final : public NoisePredictor {
public:
    explicit CouplingToyPredictor(double coupling = 0.5) : coupling_(coupling) {}
    std::string name() const override;
    bool concurrent_safe() const override { return true; }
    Tensor predict(const PredictRequest& request) const override;

private:
    double coupling_;
};

/// "toy-separable", "toy-coupled", "toy-coupled:<lambda>" or "constant:<c>".
std::unique_ptr<NoisePredictor> make_toy_predictor(const std::string& name);

}  // namespace rave
