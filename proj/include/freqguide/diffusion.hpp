// Copyright (C) 2026 The freqguide Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "freqguide/guidance.hpp"
#include "freqguide/random.hpp"
#include "freqguide/tensor.hpp"

namespace freqguide {

/// sigma_i = (max^(1/rho) + i/(S-1) (min^(1/rho) - max^(1/rho)))^rho for i < S, then 0.
inline std::vector<double> karras_grid(double sigma_min, double sigma_max, double rho,
                                       std::size_t steps) {
    if (!(sigma_min > 0.0 && sigma_min < sigma_max && std::isfinite(sigma_max)))
        fail(ErrorKind::domain, "karras grid needs 0 < sigma_min < sigma_max");
    if (!(rho >= 1.0) || !std::isfinite(rho)) fail(ErrorKind::domain, "karras grid needs rho >= 1");
    if (steps < 1) fail(ErrorKind::domain, "karras grid needs at least one step");
    const double a = std::pow(sigma_max, 1.0 / rho);
    const double b = std::pow(sigma_min, 1.0 / rho);
    std::vector<double> out;
    out.reserve(steps + 1);
    for (std::size_t i = 0; i < steps; ++i) {
        const double f = steps == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(steps - 1);
        // Endpoints exactly, not through the round trip of pow.
        if (i == 0)
            out.push_back(sigma_max);
        else if (i + 1 == steps)
            out.push_back(sigma_min);
        else
            out.push_back(std::pow(a + f * (b - a), rho));
    }
    out.push_back(0.0);
    return out;
}

struct NoiseSchedule {
    enum class Kind { linear, karras };

    Kind kind = Kind::karras;
    double sigma_min = 0.02;
    double sigma_max = 10.0;
    double rho = 7.0;

    static NoiseSchedule linear(double sigma_max) { return {Kind::linear, 0.0, sigma_max, 1.0}; }
    static NoiseSchedule karras(double sigma_min, double sigma_max, double rho) {
        return {Kind::karras, sigma_min, sigma_max, rho};
    }

    void validate() const {
        if (!(sigma_max > 0.0) || !std::isfinite(sigma_max))
            fail(ErrorKind::domain, "sigma_max must be positive");
        if (kind == Kind::karras) {
            if (!(sigma_min > 0.0 && sigma_min < sigma_max))
                fail(ErrorKind::domain, "karras schedule needs 0 < sigma_min < sigma_max");
            if (!(rho >= 1.0) || !std::isfinite(rho))
                fail(ErrorKind::domain, "karras schedule needs rho >= 1");
        }
    }

    /// sigma(0) = 0, sigma(1) = sigma_max. The Karras kind interpolates in
    /// sigma^(1/rho) between sigma_min (t -> 0+) and sigma_max (t = 1).
    double sigma(double t) const {
        if (!(t >= 0.0 && t <= 1.0)) fail(ErrorKind::domain, "t must lie in [0, 1]");
        if (t == 0.0) return 0.0;
        if (kind == Kind::linear || t == 1.0) return sigma_max * t;
        const double a = std::pow(sigma_max, 1.0 / rho);
        const double b = std::pow(sigma_min, 1.0 / rho);
        return std::pow(a + (1.0 - t) * (b - a), rho);
    }

    /// Descending grid of steps + 1 noise levels ending in exactly 0.
    std::vector<double> sigmas(std::size_t steps) const {
        validate();
        if (steps < 1) fail(ErrorKind::domain, "need at least one step");
        if (kind == Kind::karras) return karras_grid(sigma_min, sigma_max, rho, steps);
        std::vector<double> out;
        for (std::size_t i = 0; i < steps; ++i)
            out.push_back(sigma_max * (1.0 - static_cast<double>(i) / static_cast<double>(steps)));
        out.push_back(0.0);
        return out;
    }

    /// Times matching sigmas(steps), so that sigma(times[i]) == sigmas[i].
    /// The Karras sigma_min node is the t -> 0+ limit and gets t = 0, the
    /// same as the final sigma = 0 entry.
    std::vector<double> times(std::size_t steps) const {
        if (steps < 1) fail(ErrorKind::domain, "need at least one step");
        std::vector<double> out;
        for (std::size_t i = 0; i < steps; ++i) {
            const double den = kind == Kind::karras ? static_cast<double>(steps - 1)
                                                    : static_cast<double>(steps);
            out.push_back(den == 0.0 ? 1.0 : 1.0 - static_cast<double>(i) / den);
        }
        out.push_back(0.0);
        return out;
    }
};

enum class Sampler { euler, heun };

struct SampleRunConfig {
    std::size_t steps = 40;
    NoiseSchedule schedule;
    std::uint64_t seed = 0;
    std::size_t batch = 1;
    std::size_t channels = 3;
    std::size_t height = 32;
    std::size_t width = 32;
    GuidanceConfig guidance;
    Condition condition;
    Sampler sampler = Sampler::heun;

    Dims dims() const { return {batch, channels, height, width}; }
};

/// dz/dsigma of the probability-flow ODE given an x0 prediction.
inline Tensor4 ode_rhs(const Tensor4& z, double sigma, const Tensor4& x0hat) {
    if (!(sigma > 0.0)) fail(ErrorKind::domain, "ode_rhs needs sigma > 0");
    return scaled(sub(z, x0hat), 1.0 / sigma);
}

/// Integrates from sigma_max to 0. The trace, when given, gets one record
/// per step, taken at the first denoiser evaluation of that step.
inline Tensor4 sample(const DenoiserPair& pair, const SampleRunConfig& run,
                      GuidanceTrace* trace = nullptr) {
    if (run.steps < 1) fail(ErrorKind::usage, "steps must be >= 1");
    if (run.batch < 1) fail(ErrorKind::usage, "batch must be >= 1");
    run.guidance.validate();
    check_transform(run.guidance.transform, run.dims());
    const std::vector<double> sig = run.schedule.sigmas(run.steps);
    const std::vector<double> ts = run.schedule.times(run.steps);
    Tensor4 z = scaled(standard_normal(run.dims(), run.seed), sig[0]);
    for (std::size_t i = 0; i < run.steps; ++i) {
        const double s = sig[i], s_next = sig[i + 1];
        Tensor4 x0 = guided_denoise(z, s, ts[i], pair, run.condition, run.guidance, trace);
        Tensor4 d = ode_rhs(z, s, x0);
        Tensor4 z_euler = scale_add(z, d, s_next - s);
        if (run.sampler == Sampler::euler || s_next == 0.0) {
            z = std::move(z_euler);
            continue;
        }
        Tensor4 x0_next = guided_denoise(z_euler, s_next, ts[i + 1], pair, run.condition, run.guidance);
        Tensor4 d_next = ode_rhs(z_euler, s_next, x0_next);
        z = scale_add(z, add(d, d_next), 0.5 * (s_next - s));
    }
    return z;
}

} // namespace freqguide
