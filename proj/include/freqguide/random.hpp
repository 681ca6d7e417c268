// Copyright (C) 2026 The freqguide Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "freqguide/tensor.hpp"

namespace freqguide {

/// Standard normal draws from one (seed, stream) pair. Streams are
/// independent, so batch item b always sees the same noise whatever the
/// batch size. Box-Muller is done here because std::normal_distribution
/// differs between standard libraries.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t stream) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream),
                          static_cast<std::uint32_t>(stream >> 32)};
        engine_.seed(seq);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Tensor of standard normals; batch item b uses stream b of seed.
inline Tensor4 standard_normal(const Dims& dims, std::uint64_t seed) {
    Tensor4 out(dims);
    for (std::size_t b = 0; b < dims.batch; ++b) {
        NormalStream rng(seed, b);
        for (double& v : out.item(b)) v = rng.normal();
    }
    return out;
}

} // namespace freqguide
