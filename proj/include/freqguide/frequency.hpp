// Copyright (C) 2026 The freqguide Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "freqguide/tensor.hpp"

namespace freqguide {

/// Binomial blur taps (1,4,6,4,1)/16.
inline constexpr std::array<double, 5> blur_taps{1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};

inline constexpr std::size_t max_pyramid_levels = 8;

namespace detail {

/// Mirror index into [0, n) without repeating the border sample.
inline std::size_t reflect(std::ptrdiff_t i, std::size_t n) {
    const auto m = static_cast<std::ptrdiff_t>(n);
    while (i < 0 || i >= m) {
        if (i < 0) i = -i;
        if (i >= m) i = 2 * (m - 1) - i;
    }
    return static_cast<std::size_t>(i);
}

/// Output sample i of a 1-D filter reads src[taps[i][k].index] * taps[i][k].weight.
struct Tap {
    std::size_t index;
    double weight;
};
using TapTable = std::vector<std::vector<Tap>>;

/// Blur taps scaled by gain, evaluated at positions 0, step, 2*step, ... of
/// a mirrored signal of length n. When stuffed, only even positions of the
/// mirrored signal hold samples (src index = position / 2); odd ones are zero.
inline TapTable blur_table(std::size_t n, std::size_t outputs, std::size_t step, double gain, bool stuffed) {
    TapTable t(outputs);
    for (std::size_t i = 0; i < outputs; ++i)
        for (int k = -2; k <= 2; ++k) {
            const std::size_t j = reflect(static_cast<std::ptrdiff_t>(i * step) + k, n);
            if (stuffed && j % 2 != 0) continue;
            t[i].push_back({stuffed ? j / 2 : j, gain * blur_taps[k + 2]});
        }
    return t;
}

/// Rows pass with col_taps, then columns with row_taps, per plane.
inline Tensor4 separable(const Tensor4& x, const TapTable& row_taps, const TapTable& col_taps) {
    const Dims d = x.dims();
    const std::size_t H = d.height, W = d.width, OH = row_taps.size(), OW = col_taps.size();
    Dims od = d;
    od.height = OH;
    od.width = OW;
    Tensor4 out(od);
    std::vector<double> mid(H * OW);
    for (std::size_t p = 0; p < d.batch * d.channels; ++p) {
        const double* src = x.data().data() + p * H * W;
        double* dst = out.data().data() + p * OH * OW;
        for (std::size_t y = 0; y < H; ++y)
            for (std::size_t c = 0; c < OW; ++c) {
                double s = 0.0;
                for (const Tap& t : col_taps[c]) s += t.weight * src[y * W + t.index];
                mid[y * OW + c] = s;
            }
        for (std::size_t y = 0; y < OH; ++y) {
            double* row = dst + y * OW;
            for (const Tap& t : row_taps[y]) {
                const double* m = mid.data() + t.index * OW;
                for (std::size_t c = 0; c < OW; ++c) row[c] += t.weight * m[c];
            }
        }
    }
    return out;
}

/// Separable 5-tap blur where every tap is multiplied by gain on each axis.
inline Tensor4 blur(const Tensor4& x, double gain) {
    const Dims d = x.dims();
    if (d.height < 5 || d.width < 5)
        fail(ErrorKind::shape, "blur needs height and width >= 5, got " + d.str());
    return separable(x, blur_table(d.height, d.height, 1, gain, false),
                     blur_table(d.width, d.width, 1, gain, false));
}

} // namespace detail

inline Tensor4 gaussian_blur(const Tensor4& x) { return detail::blur(x, 1.0); }

/// Blur, then keep even rows and columns. Output is ceil(H/2) x ceil(W/2).
inline Tensor4 pyr_down(const Tensor4& x) {
    const Dims d = x.dims();
    if (d.height < 8 || d.width < 8)
        fail(ErrorKind::shape, "pyr_down needs height and width >= 8, got " + d.str());
    return detail::separable(x, detail::blur_table(d.height, (d.height + 1) / 2, 2, 1.0, false),
                             detail::blur_table(d.width, (d.width + 1) / 2, 2, 1.0, false));
}

/// Zero-stuff to 2H x 2W, blur with the kernel doubled per axis, crop to
/// (height, width). Targets must be 2H or 2H-1 (resp. W). The zeros are
/// skipped rather than stored.
inline Tensor4 pyr_up(const Tensor4& x, std::size_t height, std::size_t width) {
    const Dims d = x.dims();
    if ((height != 2 * d.height && height + 1 != 2 * d.height) ||
        (width != 2 * d.width && width + 1 != 2 * d.width))
        fail(ErrorKind::shape, "pyr_up target " + std::to_string(height) + "x" +
                                   std::to_string(width) + " incompatible with " + d.str());
    if (d.height < 3 || d.width < 3)
        fail(ErrorKind::shape, "pyr_up needs height and width >= 3, got " + d.str());
    return detail::separable(x, detail::blur_table(2 * d.height, height, 1, 2.0, true),
                             detail::blur_table(2 * d.width, width, 1, 2.0, true));
}

struct Pyramid {
    std::vector<Tensor4> bands; // finest first
    Tensor4 residual;

    std::size_t levels() const { return bands.size(); }
};

/// Largest level count the size rule min(H, W) >= 4 * 2^N allows, capped at 8.
inline std::size_t max_feasible_levels(std::size_t height, std::size_t width) {
    const std::size_t m = std::min(height, width);
    std::size_t n = 0;
    while (n < max_pyramid_levels && m >= (std::size_t{4} << (n + 1))) ++n;
    return n;
}

inline void check_pyramid_levels(const Dims& d, std::size_t levels) {
    const std::size_t feasible = max_feasible_levels(d.height, d.width);
    if (levels < 1 || levels > max_pyramid_levels || levels > feasible)
        fail(ErrorKind::shape, "cannot build " + std::to_string(levels) + " pyramid levels on " +
                                   std::to_string(d.height) + "x" + std::to_string(d.width) +
                                   " input; max feasible levels is " + std::to_string(feasible));
}

inline Pyramid build_laplacian_pyramid(const Tensor4& x, std::size_t levels) {
    check_pyramid_levels(x.dims(), levels);
    require_finite(x, "pyramid input");
    Pyramid p;
    Tensor4 g = x;
    for (std::size_t i = 0; i < levels; ++i) {
        Tensor4 next = pyr_down(g);
        p.bands.push_back(sub(g, pyr_up(next, g.height(), g.width())));
        g = std::move(next);
    }
    p.residual = std::move(g);
    return p;
}

inline Tensor4 reconstruct_from_pyramid(const Pyramid& p) {
    if (p.bands.empty()) fail(ErrorKind::shape, "pyramid has no bands");
    Tensor4 img = p.residual;
    for (std::size_t i = p.bands.size(); i-- > 0;) {
        const Tensor4& band = p.bands[i];
        const Dims& bd = band.dims();
        const Dims& gd = img.dims();
        if (bd.batch != gd.batch || bd.channels != gd.channels ||
            (bd.height != 2 * gd.height && bd.height + 1 != 2 * gd.height) ||
            (bd.width != 2 * gd.width && bd.width + 1 != 2 * gd.width))
            fail(ErrorKind::shape, "pyramid band " + std::to_string(i) + " " + bd.str() +
                                       " inconsistent with coarser level " + gd.str());
        img = add(band, pyr_up(img, bd.height, bd.width));
    }
    return img;
}

struct WaveletBands {
    Tensor4 ll, lh, hl, hh;
};

/// Orthonormal single-level Haar analysis. For a 2x2 block [a b; c d]:
/// ll = (a+b+c+d)/2, lh = (a-b+c-d)/2, hl = (a+b-c-d)/2, hh = (a-b-c+d)/2.
/// lh is low-pass down the rows and high-pass across the columns.
inline WaveletBands haar_dwt(const Tensor4& x) {
    const Dims d = x.dims();
    if (d.height % 2 != 0 || d.width % 2 != 0)
        fail(ErrorKind::shape, "haar_dwt needs even height and width, got " + d.str());
    require_finite(x, "wavelet input");
    Dims hd = d;
    hd.height /= 2;
    hd.width /= 2;
    WaveletBands w{Tensor4(hd), Tensor4(hd), Tensor4(hd), Tensor4(hd)};
    for (std::size_t n = 0; n < d.batch; ++n)
        for (std::size_t c = 0; c < d.channels; ++c)
            for (std::size_t y = 0; y < hd.height; ++y)
                for (std::size_t i = 0; i < hd.width; ++i) {
                    const double a = x(n, c, 2 * y, 2 * i), b = x(n, c, 2 * y, 2 * i + 1);
                    const double e = x(n, c, 2 * y + 1, 2 * i), f = x(n, c, 2 * y + 1, 2 * i + 1);
                    w.ll(n, c, y, i) = 0.5 * (a + b + e + f);
                    w.lh(n, c, y, i) = 0.5 * (a - b + e - f);
                    w.hl(n, c, y, i) = 0.5 * (a + b - e - f);
                    w.hh(n, c, y, i) = 0.5 * (a - b - e + f);
                }
    return w;
}

inline Tensor4 haar_idwt(const WaveletBands& w) {
    const Dims hd = w.ll.dims();
    if (w.lh.dims() != hd || w.hl.dims() != hd || w.hh.dims() != hd)
        fail(ErrorKind::shape, "wavelet bands have inconsistent dims");
    Dims d = hd;
    d.height *= 2;
    d.width *= 2;
    Tensor4 x(d);
    for (std::size_t n = 0; n < hd.batch; ++n)
        for (std::size_t c = 0; c < hd.channels; ++c)
            for (std::size_t y = 0; y < hd.height; ++y)
                for (std::size_t i = 0; i < hd.width; ++i) {
                    const double s = w.ll(n, c, y, i), h = w.lh(n, c, y, i);
                    const double v = w.hl(n, c, y, i), g = w.hh(n, c, y, i);
                    x(n, c, 2 * y, 2 * i) = 0.5 * (s + h + v + g);
                    x(n, c, 2 * y, 2 * i + 1) = 0.5 * (s - h + v - g);
                    x(n, c, 2 * y + 1, 2 * i) = 0.5 * (s + h - v - g);
                    x(n, c, 2 * y + 1, 2 * i + 1) = 0.5 * (s - h - v + g);
                }
    return x;
}

/// Which linear invertible transform splits a tensor into frequency bands.
struct TransformKind {
    enum class Family { laplacian, haar };

    Family family = Family::laplacian;
    std::size_t levels = 1;

    static TransformKind laplacian(std::size_t levels) { return {Family::laplacian, levels}; }
    static TransformKind haar() { return {Family::haar, 1}; }

    /// Detail bands plus the low band.
    std::size_t band_count() const { return family == Family::haar ? 2 : levels + 1; }

    std::string str() const {
        return family == Family::haar ? "haar" : "laplacian(" + std::to_string(levels) + ")";
    }

    friend bool operator==(const TransformKind&, const TransformKind&) = default;
};

inline void check_transform(const TransformKind& kind, const Dims& d) {
    if (kind.family == TransformKind::Family::haar) {
        if (kind.levels != 1) fail(ErrorKind::usage, "haar transform has exactly one level");
        if (d.height % 2 != 0 || d.width % 2 != 0)
            fail(ErrorKind::shape, "haar transform needs even height and width, got " + d.str());
    } else {
        check_pyramid_levels(d, kind.levels);
    }
}

/// Bands ordered from high to low frequency; the last entry is the low band.
/// The three Haar detail bands form one tensor stacked along channels
/// (lh, hl, hh).
inline std::vector<Tensor4> decompose(const Tensor4& x, const TransformKind& kind) {
    check_transform(kind, x.dims());
    if (kind.family == TransformKind::Family::haar) {
        WaveletBands w = haar_dwt(x);
        std::vector<Tensor4> out;
        out.push_back(concat_channels({&w.lh, &w.hl, &w.hh}));
        out.push_back(std::move(w.ll));
        return out;
    }
    Pyramid p = build_laplacian_pyramid(x, kind.levels);
    std::vector<Tensor4> out = std::move(p.bands);
    out.push_back(std::move(p.residual));
    return out;
}

inline Tensor4 recompose(std::vector<Tensor4> bands, const TransformKind& kind) {
    if (bands.size() != kind.band_count())
        fail(ErrorKind::shape, "expected " + std::to_string(kind.band_count()) + " bands for " +
                                   kind.str() + ", got " + std::to_string(bands.size()));
    if (kind.family == TransformKind::Family::haar) {
        std::vector<Tensor4> detail = split_channels(bands[0], 3);
        return haar_idwt(WaveletBands{std::move(bands[1]), std::move(detail[0]),
                                      std::move(detail[1]), std::move(detail[2])});
    }
    Pyramid p;
    p.residual = std::move(bands.back());
    bands.pop_back();
    p.bands = std::move(bands);
    return reconstruct_from_pyramid(p);
}

} // namespace freqguide
