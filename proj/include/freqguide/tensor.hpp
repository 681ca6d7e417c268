// Copyright (C) 2026 The freqguide Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "freqguide/error.hpp"

namespace freqguide {

struct Dims {
    std::size_t batch = 0;
    std::size_t channels = 0;
    std::size_t height = 0;
    std::size_t width = 0;

    std::size_t size() const { return batch * channels * height * width; }
    std::size_t item_size() const { return channels * height * width; }
    std::size_t plane_size() const { return height * width; }

    friend bool operator==(const Dims&, const Dims&) = default;

    std::string str() const {
        return "(" + std::to_string(batch) + "," + std::to_string(channels) + "," +
               std::to_string(height) + "," + std::to_string(width) + ")";
    }
};

/// Dense batch x channel x height x width array of doubles, row-major with
/// the batch index outermost.
class Tensor4 {
public:
    Tensor4() = default;

    explicit Tensor4(Dims dims, double fill = 0.0) : dims_(dims) {
        check_dims(dims);
        data_.assign(dims.size(), fill);
    }

    Tensor4(Dims dims, std::vector<double> data) : dims_(dims), data_(std::move(data)) {
        check_dims(dims);
        if (data_.size() != dims.size())
            fail(ErrorKind::shape, "data length " + std::to_string(data_.size()) +
                                       " does not match dims " + dims.str());
    }

    const Dims& dims() const { return dims_; }
    std::size_t batch() const { return dims_.batch; }
    std::size_t channels() const { return dims_.channels; }
    std::size_t height() const { return dims_.height; }
    std::size_t width() const { return dims_.width; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }
    const std::vector<double>& values() const { return data_; }

    std::span<const double> item(std::size_t b) const {
        return std::span<const double>(data_).subspan(b * dims_.item_size(), dims_.item_size());
    }
    std::span<double> item(std::size_t b) {
        return std::span<double>(data_).subspan(b * dims_.item_size(), dims_.item_size());
    }

    double& operator()(std::size_t b, std::size_t c, std::size_t y, std::size_t x) {
        return data_[index(b, c, y, x)];
    }
    double operator()(std::size_t b, std::size_t c, std::size_t y, std::size_t x) const {
        return data_[index(b, c, y, x)];
    }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

private:
    std::size_t index(std::size_t b, std::size_t c, std::size_t y, std::size_t x) const {
        return ((b * dims_.channels + c) * dims_.height + y) * dims_.width + x;
    }

    static void check_dims(const Dims& d) {
        if (d.batch == 0 || d.channels == 0 || d.height == 0 || d.width == 0)
            fail(ErrorKind::shape, "all dims must be positive, got " + d.str());
    }

    Dims dims_{};
    std::vector<double> data_;
};

inline bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

/// Rejects NaN/Inf at an API boundary.
inline void require_finite(const Tensor4& t, const std::string& what) {
    if (!all_finite(t.data())) fail(ErrorKind::domain, what + " contains non-finite values");
}

inline void require_finite(double v, const std::string& what) {
    if (!std::isfinite(v)) fail(ErrorKind::domain, what + " must be finite");
}

inline void require_same_dims(const Tensor4& a, const Tensor4& b, const std::string& what) {
    if (a.dims() != b.dims())
        fail(ErrorKind::shape, what + ": dims " + a.dims().str() + " vs " + b.dims().str());
}

enum class BinaryOp { add, sub, mul };

/// A non-finite result means a non-finite input (or overflow), so one check
/// on the output covers both operands.
inline Tensor4 elementwise(const Tensor4& a, const Tensor4& b, BinaryOp op) {
    require_same_dims(a, b, "elementwise");
    Tensor4 out(a.dims());
    auto o = out.data();
    auto x = a.data();
    auto y = b.data();
    switch (op) {
    case BinaryOp::add:
        for (std::size_t i = 0; i < o.size(); ++i) o[i] = x[i] + y[i];
        break;
    case BinaryOp::sub:
        for (std::size_t i = 0; i < o.size(); ++i) o[i] = x[i] - y[i];
        break;
    case BinaryOp::mul:
        for (std::size_t i = 0; i < o.size(); ++i) o[i] = x[i] * y[i];
        break;
    }
    require_finite(out, "elementwise result");
    return out;
}

inline Tensor4 add(const Tensor4& a, const Tensor4& b) { return elementwise(a, b, BinaryOp::add); }
inline Tensor4 sub(const Tensor4& a, const Tensor4& b) { return elementwise(a, b, BinaryOp::sub); }
inline Tensor4 mul(const Tensor4& a, const Tensor4& b) { return elementwise(a, b, BinaryOp::mul); }

/// a + alpha * b
inline Tensor4 scale_add(const Tensor4& a, const Tensor4& b, double alpha) {
    require_same_dims(a, b, "scale_add");
    require_finite(alpha, "scale_add alpha");
    Tensor4 out(a.dims());
    auto o = out.data();
    auto x = a.data();
    auto y = b.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = x[i] + alpha * y[i];
    return out;
}

inline Tensor4 scaled(const Tensor4& a, double alpha) {
    Tensor4 out(a.dims());
    auto o = out.data();
    auto x = a.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = alpha * x[i];
    return out;
}

inline double sum_squares(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double frobenius_norm(const Tensor4& a) { return std::sqrt(sum_squares(a.data())); }

inline std::vector<double> frobenius_norm_per_batch(const Tensor4& a) {
    std::vector<double> out(a.batch());
    for (std::size_t b = 0; b < a.batch(); ++b) out[b] = std::sqrt(sum_squares(a.item(b)));
    return out;
}

inline double max_abs_diff(const Tensor4& a, const Tensor4& b) {
    require_same_dims(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

/// Stacks tensors with equal batch/height/width along the channel axis.
inline Tensor4 concat_channels(const std::vector<const Tensor4*>& parts) {
    if (parts.empty()) fail(ErrorKind::usage, "concat_channels needs at least one tensor");
    Dims d = parts.front()->dims();
    std::size_t channels = 0;
    for (const Tensor4* p : parts) {
        const Dims& e = p->dims();
        if (e.batch != d.batch || e.height != d.height || e.width != d.width)
            fail(ErrorKind::shape, "concat_channels: dims " + e.str() + " vs " + d.str());
        channels += e.channels;
    }
    Dims od = d;
    od.channels = channels;
    Tensor4 out(od);
    for (std::size_t b = 0; b < d.batch; ++b) {
        double* dst = out.item(b).data();
        for (const Tensor4* p : parts) {
            auto src = p->item(b);
            std::copy(src.begin(), src.end(), dst);
            dst += src.size();
        }
    }
    return out;
}

/// Inverse of concat_channels for equal-sized groups.
inline std::vector<Tensor4> split_channels(const Tensor4& t, std::size_t groups) {
    if (groups == 0 || t.channels() % groups != 0)
        fail(ErrorKind::shape, "cannot split " + std::to_string(t.channels()) + " channels into " +
                                   std::to_string(groups) + " groups");
    Dims d = t.dims();
    d.channels /= groups;
    std::vector<Tensor4> out(groups, Tensor4(d));
    const std::size_t chunk = d.item_size();
    for (std::size_t b = 0; b < d.batch; ++b) {
        auto src = t.item(b);
        for (std::size_t g = 0; g < groups; ++g) {
            auto part = src.subspan(g * chunk, chunk);
            std::copy(part.begin(), part.end(), out[g].item(b).begin());
        }
    }
    return out;
}

/// Copies batch items [first, first + count).
inline Tensor4 slice_batch(const Tensor4& t, std::size_t first, std::size_t count) {
    if (count == 0 || first + count > t.batch())
        fail(ErrorKind::shape, "batch slice out of range for " + t.dims().str());
    Dims d = t.dims();
    d.batch = count;
    const std::size_t n = d.item_size();
    auto src = t.data().subspan(first * n, count * n);
    return Tensor4(d, std::vector<double>(src.begin(), src.end()));
}

} // namespace freqguide
