// Copyright (C) 2026 The freqguide Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

#include "freqguide/error.hpp"
#include "freqguide/tensor.hpp"

namespace testing {

/// Uniform values in [lo, hi).
inline freqguide::Tensor4 random_tensor(freqguide::Dims d, std::uint64_t seed, double lo = -1.0,
                                        double hi = 1.0) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    freqguide::Tensor4 t(d);
    for (auto& v : t.data()) v = u(gen);
    return t;
}

/// Kind of the freqguide::Error thrown by fn, or nullopt-like sentinel -1.
inline int error_kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const freqguide::Error& e) {
        return static_cast<int>(e.kind());
    }
    return -1;
}

/// Stacks tensors of equal item dims along the batch axis.
inline freqguide::Tensor4 concat_batch(const std::vector<freqguide::Tensor4>& parts) {
    freqguide::Dims d = parts.front().dims();
    d.batch = 0;
    for (const auto& p : parts) d.batch += p.batch();
    freqguide::Tensor4 out(d);
    auto it = out.data().begin();
    for (const auto& p : parts) it = std::copy(p.data().begin(), p.data().end(), it);
    return out;
}

inline int kind(freqguide::ErrorKind k) { return static_cast<int>(k); }

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("freqguide_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

} // namespace testing
