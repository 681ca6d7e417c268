// Copyright (C) 2026 The freqguide Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <cmath>

#include "freqguide/frequency.hpp"
#include "support.hpp"

using namespace freqguide;
using testing::error_kind_of;
using testing::kind;
using testing::random_tensor;

namespace {

const double kernel[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};

// Single mirror reflection, enough for a 5-tap kernel on n >= 3.
long mirror(long i, long n) {
    if (i < 0) return -i;
    if (i >= n) return 2 * n - 2 - i;
    return i;
}

// Direct 2-D convolution with the 25-entry outer-product kernel.
Tensor4 conv2d_oracle(const Tensor4& x, double gain) {
    const Dims d = x.dims();
    Tensor4 out(d);
    const long H = static_cast<long>(d.height), W = static_cast<long>(d.width);
    for (std::size_t b = 0; b < d.batch; ++b)
        for (std::size_t c = 0; c < d.channels; ++c)
            for (long y = 0; y < H; ++y)
                for (long i = 0; i < W; ++i) {
                    double s = 0.0;
                    for (int ky = -2; ky <= 2; ++ky)
                        for (int kx = -2; kx <= 2; ++kx)
                            s += gain * gain * kernel[ky + 2] * kernel[kx + 2] *
                                 x(b, c, mirror(y + ky, H), mirror(i + kx, W));
                    out(b, c, y, i) = s;
                }
    return out;
}

Tensor4 up_oracle(const Tensor4& x, std::size_t h, std::size_t w) {
    const Dims d = x.dims();
    Tensor4 z({d.batch, d.channels, 2 * d.height, 2 * d.width});
    for (std::size_t b = 0; b < d.batch; ++b)
        for (std::size_t c = 0; c < d.channels; ++c)
            for (std::size_t y = 0; y < d.height; ++y)
                for (std::size_t i = 0; i < d.width; ++i) z(b, c, 2 * y, 2 * i) = x(b, c, y, i);
    const Tensor4 f = conv2d_oracle(z, 2.0);
    Tensor4 out({d.batch, d.channels, h, w});
    for (std::size_t b = 0; b < d.batch; ++b)
        for (std::size_t c = 0; c < d.channels; ++c)
            for (std::size_t y = 0; y < h; ++y)
                for (std::size_t i = 0; i < w; ++i) out(b, c, y, i) = f(b, c, y, i);
    return out;
}

double energy(const Tensor4& t) { return sum_squares(t.data()); }

Tensor4 checkerboard(std::size_t n) {
    Tensor4 t({1, 1, n, n});
    for (std::size_t y = 0; y < n; ++y)
        for (std::size_t x = 0; x < n; ++x) t(0, 0, y, x) = (x + y) % 2 ? -1.0 : 1.0;
    return t;
}

Tensor4 blob(std::size_t n, double sigma) {
    Tensor4 t({1, 1, n, n});
    const double c = (static_cast<double>(n) - 1.0) / 2.0;
    for (std::size_t y = 0; y < n; ++y)
        for (std::size_t x = 0; x < n; ++x) {
            const double dy = static_cast<double>(y) - c, dx = static_cast<double>(x) - c;
            t(0, 0, y, x) = std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
        }
    return t;
}

} // namespace

TEST_CASE("blur matches direct convolution") {
    for (std::size_t h : {5u, 9u, 16u, 17u}) {
        const Tensor4 x = random_tensor({2, 2, h, h + 3}, h);
        CHECK(max_abs_diff(gaussian_blur(x), conv2d_oracle(x, 1.0)) < 1e-14);
    }
}

TEST_CASE("blur of a centered impulse is the kernel outer product") {
    Tensor4 x({1, 1, 9, 9});
    x(0, 0, 4, 4) = 1.0;
    const Tensor4 y = gaussian_blur(x);
    for (std::size_t r = 0; r < 9; ++r)
        for (std::size_t c = 0; c < 9; ++c) {
            const long dr = static_cast<long>(r) - 4, dc = static_cast<long>(c) - 4;
            const double want =
                (std::abs(dr) <= 2 && std::abs(dc) <= 2) ? kernel[dr + 2] * kernel[dc + 2] : 0.0;
            CHECK(y(0, 0, r, c) == Catch::Approx(want).margin(1e-16));
        }
}

TEST_CASE("blur preserves constants and is linear") {
    const Tensor4 c({1, 3, 7, 11}, 2.5);
    CHECK(max_abs_diff(gaussian_blur(c), c) < 1e-14);
    const Tensor4 a = random_tensor({1, 2, 12, 12}, 1), b = random_tensor({1, 2, 12, 12}, 2);
    CHECK(max_abs_diff(gaussian_blur(add(a, b)), add(gaussian_blur(a), gaussian_blur(b))) < 1e-14);
    CHECK(error_kind_of([] { gaussian_blur(Tensor4({1, 1, 4, 9})); }) == kind(ErrorKind::shape));
}

TEST_CASE("pyr_down shape, constants and oracle") {
    CHECK(pyr_down(Tensor4({1, 1, 16, 16})).dims() == Dims{1, 1, 8, 8});
    CHECK(pyr_down(Tensor4({1, 1, 17, 9})).dims() == Dims{1, 1, 9, 5});
    const Tensor4 c({1, 1, 8, 8}, -1.5);
    const Tensor4 d = pyr_down(c);
    CHECK(d.dims() == Dims{1, 1, 4, 4});
    CHECK(max_abs_diff(d, Tensor4({1, 1, 4, 4}, -1.5)) < 1e-14);
    const Tensor4 x = random_tensor({2, 1, 13, 10}, 3);
    const Tensor4 full = conv2d_oracle(x, 1.0);
    const Tensor4 y = pyr_down(x);
    for (std::size_t b = 0; b < 2; ++b)
        for (std::size_t r = 0; r < 7; ++r)
            for (std::size_t q = 0; q < 5; ++q) CHECK(y(b, 0, r, q) == Catch::Approx(full(b, 0, 2 * r, 2 * q)).margin(1e-14));
    CHECK(error_kind_of([] { pyr_down(Tensor4({1, 1, 7, 16})); }) == kind(ErrorKind::shape));
}

TEST_CASE("pyr_up shape, constants and oracle") {
    const Tensor4 c({1, 2, 4, 4}, 3.0);
    const Tensor4 u = pyr_up(c, 8, 8);
    CHECK(u.dims() == Dims{1, 2, 8, 8});
    CHECK(max_abs_diff(u, Tensor4({1, 2, 8, 8}, 3.0)) < 1e-14);
    CHECK(max_abs_diff(pyr_up(c, 7, 8), Tensor4({1, 2, 7, 8}, 3.0)) < 1e-14);
    for (auto [h, w] : {std::pair{10u, 12u}, std::pair{9u, 11u}, std::pair{10u, 11u}}) {
        const Tensor4 x = random_tensor({1, 2, 5, 6}, h * w);
        CHECK(max_abs_diff(pyr_up(x, h, w), up_oracle(x, h, w)) < 1e-14);
    }
    const Tensor4 a = random_tensor({1, 1, 4, 4}, 4), b = random_tensor({1, 1, 4, 4}, 5);
    CHECK(max_abs_diff(pyr_up(add(a, b), 8, 8), add(pyr_up(a, 8, 8), pyr_up(b, 8, 8))) < 1e-14);
    CHECK(error_kind_of([&] { pyr_up(a, 6, 8); }) == kind(ErrorKind::shape));
}

TEST_CASE("pyramid definition and constants") {
    const Tensor4 x = random_tensor({1, 3, 32, 32}, 6);
    const Pyramid p = build_laplacian_pyramid(x, 1);
    CHECK(max_abs_diff(p.residual, pyr_down(x)) == 0.0);
    CHECK(max_abs_diff(p.bands[0], sub(x, pyr_up(pyr_down(x), 32, 32))) == 0.0);

    const Pyramid q = build_laplacian_pyramid(Tensor4({1, 1, 64, 64}, 0.7), 3);
    for (const auto& band : q.bands) CHECK(frobenius_norm(band) < 1e-12);
    CHECK(q.residual.dims() == Dims{1, 1, 8, 8});
    CHECK(max_abs_diff(q.residual, Tensor4({1, 1, 8, 8}, 0.7)) < 1e-12);
}

TEST_CASE("pyramid level feasibility") {
    CHECK(max_feasible_levels(64, 64) == 4);
    CHECK(max_feasible_levels(32, 48) == 3);
    CHECK(max_feasible_levels(7, 64) == 0);
    CHECK(max_feasible_levels(100000, 100000) == 8);
    const Tensor4 x({1, 1, 32, 32});
    CHECK(error_kind_of([&] { build_laplacian_pyramid(x, 4); }) == kind(ErrorKind::shape));
    CHECK(error_kind_of([&] { build_laplacian_pyramid(x, 0); }) == kind(ErrorKind::shape));
    try {
        build_laplacian_pyramid(x, 4);
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("max feasible levels is 3") != std::string::npos);
    }
}

TEST_CASE("pyramid perfect reconstruction and linearity") {
    for (std::size_t n : {32u, 48u, 64u})
        for (std::size_t levels = 1; levels <= 3; ++levels) {
            const Tensor4 x = random_tensor({2, 3, n, n}, 10 * n + levels, -10, 10);
            CHECK(max_abs_diff(reconstruct_from_pyramid(build_laplacian_pyramid(x, levels)), x) < 1e-9);
        }
    const Tensor4 odd = random_tensor({1, 2, 37, 45}, 7, -3, 3);
    CHECK(max_abs_diff(reconstruct_from_pyramid(build_laplacian_pyramid(odd, 2)), odd) < 1e-9);

    const Tensor4 a = random_tensor({1, 2, 32, 32}, 8), b = random_tensor({1, 2, 32, 32}, 9);
    const Pyramid pa = build_laplacian_pyramid(a, 2), pb = build_laplacian_pyramid(b, 2);
    const Pyramid pab = build_laplacian_pyramid(add(a, b), 2);
    for (std::size_t i = 0; i < 2; ++i) CHECK(max_abs_diff(pab.bands[i], add(pa.bands[i], pb.bands[i])) < 1e-10);
    CHECK(max_abs_diff(pab.residual, add(pa.residual, pb.residual)) < 1e-10);
    Pyramid sum{{add(pa.bands[0], pb.bands[0]), add(pa.bands[1], pb.bands[1])}, add(pa.residual, pb.residual)};
    CHECK(max_abs_diff(reconstruct_from_pyramid(sum), add(reconstruct_from_pyramid(pa), reconstruct_from_pyramid(pb))) < 1e-10);
}

TEST_CASE("zero bands reconstruct to the upsampled residual") {
    const Tensor4 r = random_tensor({1, 1, 8, 8}, 10);
    Pyramid p{{Tensor4({1, 1, 32, 32}), Tensor4({1, 1, 16, 16})}, r};
    CHECK(max_abs_diff(reconstruct_from_pyramid(p), pyr_up(pyr_up(r, 16, 16), 32, 32)) == 0.0);
    Pyramid bad{{Tensor4({1, 1, 30, 32})}, r};
    CHECK(error_kind_of([&] { reconstruct_from_pyramid(bad); }) == kind(ErrorKind::shape));
}

TEST_CASE("haar on a constant block") {
    // [c c; c c] -> ll = (c + c + c + c) / 2 = 2c, details zero.
    const Tensor4 x({1, 1, 2, 2}, 1.25);
    const WaveletBands w = haar_dwt(x);
    CHECK(w.ll[0] == 2.5);
    CHECK(w.lh[0] == 0.0);
    CHECK(w.hl[0] == 0.0);
    CHECK(w.hh[0] == 0.0);
}

TEST_CASE("haar matches 2x2 block matrix") {
    const Tensor4 x({1, 1, 2, 2}, std::vector<double>{1, 2, 3, 5});
    const WaveletBands w = haar_dwt(x);
    CHECK(w.ll[0] == Catch::Approx((1 + 2 + 3 + 5) / 2.0));
    CHECK(w.lh[0] == Catch::Approx((1 - 2 + 3 - 5) / 2.0));
    CHECK(w.hl[0] == Catch::Approx((1 + 2 - 3 - 5) / 2.0));
    CHECK(w.hh[0] == Catch::Approx((1 - 2 - 3 + 5) / 2.0));
}

TEST_CASE("haar perfect reconstruction and energy") {
    for (std::size_t n : {32u, 48u, 64u}) {
        const Tensor4 x = random_tensor({2, 3, n, n}, n, -10, 10);
        const WaveletBands w = haar_dwt(x);
        CHECK(w.ll.dims() == Dims{2, 3, n / 2, n / 2});
        CHECK(max_abs_diff(haar_idwt(w), x) < 1e-9);
        const double e = energy(w.ll) + energy(w.lh) + energy(w.hl) + energy(w.hh);
        CHECK(std::abs(e - energy(x)) <= 1e-9 * energy(x));
    }
    CHECK(error_kind_of([] { haar_dwt(Tensor4({1, 1, 3, 4})); }) == kind(ErrorKind::shape));
}

TEST_CASE("decompose and recompose for both transforms") {
    const Tensor4 x = random_tensor({2, 3, 32, 32}, 11, -10, 10);
    for (const TransformKind& k : {TransformKind::laplacian(1), TransformKind::laplacian(3), TransformKind::haar()}) {
        auto bands = decompose(x, k);
        CHECK(bands.size() == k.band_count());
        CHECK(max_abs_diff(recompose(bands, k), x) < 1e-9);
    }
    auto h = decompose(x, TransformKind::haar());
    CHECK(h[0].dims() == Dims{2, 9, 16, 16});
    CHECK(max_abs_diff(h[1], haar_dwt(x).ll) == 0.0);
    CHECK(error_kind_of([&] { recompose({x}, TransformKind::haar()); }) == kind(ErrorKind::shape));
}

TEST_CASE("band separation") {
    // Depths where the blob stays at least 2 px wide at the coarsest scale.
    for (std::size_t n : {32u, 64u})
        for (std::size_t levels : {1u, 2u}) {
            const Pyramid p = build_laplacian_pyramid(blob(n, 8.0), levels);
            double total = energy(p.residual);
            for (const auto& b : p.bands) total += energy(b);
            CHECK((energy(p.residual) + energy(p.bands.back())) / total >= 0.9);
        }

    const Tensor4 cb = checkerboard(64);
    for (std::size_t levels = 1; levels <= 4; ++levels) {
        const Pyramid q = build_laplacian_pyramid(cb, levels);
        double qt = energy(q.residual);
        for (const auto& b : q.bands) qt += energy(b);
        CHECK(energy(q.bands[0]) / qt >= 0.9);
    }

    const WaveletBands w = haar_dwt(cb);
    CHECK(energy(w.hh) == Catch::Approx(energy(cb)));
}
