// Copyright (C) 2026 The RAVE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rave {

/// Accounting bucket for tensor storage. The sampler's memory bound is
/// checked against the kLatent bucket only.
enum class MemoryKind { kPixel = 0, kLatent, kCondition, kOther };

namespace memory {

struct Usage {
    std::size_t live_bytes = 0;
    std::size_t peak_bytes = 0;
};

Usage usage(MemoryKind kind);
/// Resets the peak of `kind` to its current live size.
void reset_peak(MemoryKind kind);

}  // namespace memory

struct Shape {
    int height = 0;
    int width = 0;
    int channels = 0;

    std::size_t size() const {
        return static_cast<std::size_t>(height) * static_cast<std::size_t>(width) *
               static_cast<std::size_t>(channels);
    }
    friend bool operator==(const Shape&, const Shape&) = default;
};

/// Dense H x W x C array of doubles in row-major HWC order. The element
/// count is fixed at construction so the storage accounting stays exact.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, MemoryKind kind = MemoryKind::kOther, double fill = 0.0);
    Tensor(const Tensor& other);
    Tensor(Tensor&& other) noexcept;
    Tensor& operator=(const Tensor& other);
    Tensor& operator=(Tensor&& other) noexcept;
    ~Tensor();

    const Shape& shape() const { return shape_; }
    int height() const { return shape_.height; }
    int width() const { return shape_.width; }
    int channels() const { return shape_.channels; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }
    MemoryKind kind() const { return kind_; }

    double& at(int y, int x, int c) { return data_[index(y, x, c)]; }
    const double& at(int y, int x, int c) const { return data_[index(y, x, c)]; }

    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }
    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    /// Exact element-wise equality including shape.
    friend bool operator==(const Tensor& a, const Tensor& b) {
        return a.shape_ == b.shape_ && a.data_ == b.data_;
    }

private:
    std::size_t index(int y, int x, int c) const {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(shape_.width) +
                static_cast<std::size_t>(x)) *
                   static_cast<std::size_t>(shape_.channels) +
               static_cast<std::size_t>(c);
    }
    void account_alloc() const;
    void account_free() const;

    Shape shape_{};
    MemoryKind kind_ = MemoryKind::kOther;
    std::vector<double> data_;
};

}  // namespace rave
