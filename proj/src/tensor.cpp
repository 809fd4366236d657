// Copyright (C) 2026 The RAVE Authors
// SPDX-License-Identifier: Apache-2.0

#include "rave/tensor.hpp"

#include <array>
#include <atomic>

namespace rave {
namespace {

struct Counter {
    std::atomic<std::size_t> live{0};
    std::atomic<std::size_t> peak{0};
};

std::array<Counter, 4>& counters() {
    static std::array<Counter, 4> c;
    return c;
}

Counter& counter(MemoryKind kind) { return counters()[static_cast<std::size_t>(kind)]; }

}  // namespace

namespace memory {

Usage usage(MemoryKind kind) {
    auto& c = counter(kind);
    return {c.live.load(), c.peak.load()};
}

void reset_peak(MemoryKind kind) {
    auto& c = counter(kind);
    c.peak.store(c.live.load());
}

}  // namespace memory

void Tensor::account_alloc() const {
    if (data_.empty()) return;
    auto& c = counter(kind_);
    std::size_t now = c.live.fetch_add(data_.size() * sizeof(double)) + data_.size() * sizeof(double);
    std::size_t prev = c.peak.load();
    while (now > prev && !c.peak.compare_exchange_weak(prev, now)) {
    }
}

void Tensor::account_free() const {
    if (data_.empty()) return;
    counter(kind_).live.fetch_sub(data_.size() * sizeof(double));
}

Tensor::Tensor(Shape shape, MemoryKind kind, double fill)
    : shape_(shape), kind_(kind), data_(shape.size(), fill) {
    account_alloc();
}

Tensor::Tensor(const Tensor& other) : shape_(other.shape_), kind_(other.kind_), data_(other.data_) {
    account_alloc();
}

Tensor::Tensor(Tensor&& other) noexcept
    : shape_(other.shape_), kind_(other.kind_), data_(std::move(other.data_)) {
    other.data_.clear();
    other.shape_ = {};
}

Tensor& Tensor::operator=(const Tensor& other) {
    if (this == &other) return *this;
    account_free();
    shape_ = other.shape_;
    kind_ = other.kind_;
    data_ = other.data_;
    account_alloc();
    return *this;
}

Tensor& Tensor::operator=(Tensor&& other) noexcept {
    if (this == &other) return *this;
    account_free();
    shape_ = other.shape_;
    kind_ = other.kind_;
    data_ = std::move(other.data_);
    other.data_.clear();
    other.shape_ = {};
    return *this;
}

Tensor::~Tensor() { account_free(); }

}  // namespace rave
