// Copyright (C) 2026 The freqguide Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "freqguide/frequency.hpp"
#include "freqguide/tensor.hpp"

namespace freqguide {

/// Conditioning label. Null selects the unconditional model.
struct Condition {
    std::optional<int> label;

    static Condition null() { return {}; }
    static Condition of_class(int k) { return {k}; }
    bool is_null() const { return !label.has_value(); }
    std::string str() const { return label ? std::to_string(*label) : "null"; }
};

/// x0-predicting denoisers. uncond may be a degraded model instead of a
/// null-conditioned one.
struct DenoiserPair {
    std::function<Tensor4(const Tensor4& z, double sigma, const Condition& y)> cond;
    std::function<Tensor4(const Tensor4& z, double sigma)> uncond;
};

/// Guidance is active for t in [t_end, t_start].
struct Interval {
    double t_start = 1.0;
    double t_end = 0.0;

    bool contains(double t) const { return t >= t_end && t <= t_start; }
};

struct GuidanceConfig {
    TransformKind transform = TransformKind::laplacian(1);
    std::vector<double> scales{1.0, 1.0};   // high to low frequency
    std::vector<double> parallel_weights;   // empty means all 1
    std::optional<Interval> interval;

    /// Single-level pyramid with one scale for the detail band and one for the residual.
    static GuidanceConfig two_band(double w_high, double w_low) {
        GuidanceConfig g;
        g.scales = {w_high, w_low};
        return g;
    }

    static GuidanceConfig uniform(const TransformKind& transform, double w) {
        GuidanceConfig g;
        g.transform = transform;
        g.scales.assign(transform.band_count(), w);
        return g;
    }

    double parallel_weight(std::size_t band) const {
        return parallel_weights.empty() ? 1.0 : parallel_weights[band];
    }

    void validate() const {
        const std::size_t n = transform.band_count();
        if (transform.family == TransformKind::Family::laplacian &&
            (transform.levels < 1 || transform.levels > max_pyramid_levels))
            fail(ErrorKind::usage, "pyramid levels must be in [1, " +
                                       std::to_string(max_pyramid_levels) + "]");
        if (scales.size() != n)
            fail(ErrorKind::usage, transform.str() + " needs " + std::to_string(n) +
                                       " scales, got " + std::to_string(scales.size()));
        if (!parallel_weights.empty() && parallel_weights.size() != n)
            fail(ErrorKind::usage, transform.str() + " needs " + std::to_string(n) +
                                       " parallel weights, got " +
                                       std::to_string(parallel_weights.size()));
        for (double s : scales) require_finite(s, "guidance scale");
        for (double w : parallel_weights) require_finite(w, "parallel weight");
        if (interval) {
            const Interval& iv = *interval;
            if (!(0.0 <= iv.t_end && iv.t_end < iv.t_start && iv.t_start <= 1.0))
                fail(ErrorKind::usage, "guidance interval needs 0 <= t_end < t_start <= 1");
        }
    }
};

/// d_u + w (d_c - d_u)
inline Tensor4 cfg_combine(const Tensor4& d_c, const Tensor4& d_u, double w) {
    require_same_dims(d_c, d_u, "cfg_combine");
    require_finite(d_c, "conditional prediction");
    require_finite(d_u, "unconditional prediction");
    return scale_add(d_u, sub(d_c, d_u), w);
}

struct Projection {
    Tensor4 parallel;
    Tensor4 orthogonal;
};

/// Splits v0 per batch item into the component along v1 and the remainder.
/// Items where v1 is zero get a zero parallel part.
inline Projection project(const Tensor4& v0, const Tensor4& v1) {
    require_same_dims(v0, v1, "project");
    Projection p{Tensor4(v0.dims()), Tensor4(v0.dims())};
    for (std::size_t b = 0; b < v0.batch(); ++b) {
        auto a = v0.item(b);
        auto u = v1.item(b);
        auto par = p.parallel.item(b);
        auto orth = p.orthogonal.item(b);
        const double norm = std::sqrt(sum_squares(u));
        if (norm > 0.0) {
            double coef = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) coef += a[i] * (u[i] / norm);
            for (std::size_t i = 0; i < a.size(); ++i) par[i] = coef * (u[i] / norm);
        }
        for (std::size_t i = 0; i < a.size(); ++i) orth[i] = a[i] - par[i];
    }
    return p;
}

/// Per band: diff = c - u, reweight its component along c, then
/// guided = c + (scale - 1) diff. Returns the guided bands, high to low.
inline std::vector<Tensor4> freqcfg_combine_bands(const Tensor4& d_c, const Tensor4& d_u,
                                                  const GuidanceConfig& cfg) {
    cfg.validate();
    require_same_dims(d_c, d_u, "freqcfg_combine");
    std::vector<Tensor4> bc = decompose(d_c, cfg.transform);
    std::vector<Tensor4> bu = decompose(d_u, cfg.transform);
    std::vector<Tensor4> guided;
    guided.reserve(bc.size());
    for (std::size_t i = 0; i < bc.size(); ++i) {
        Tensor4 diff = sub(bc[i], bu[i]);
        Projection p = project(diff, bc[i]);
        Tensor4 reweighted = scale_add(p.orthogonal, p.parallel, cfg.parallel_weight(i));
        guided.push_back(scale_add(bc[i], reweighted, cfg.scales[i] - 1.0));
    }
    return guided;
}

/// freqcfg_combine_bands taken back through the inverse transform.
inline Tensor4 freqcfg_combine(const Tensor4& d_c, const Tensor4& d_u, const GuidanceConfig& cfg) {
    return recompose(freqcfg_combine_bands(d_c, d_u, cfg), cfg.transform);
}

struct BandNorms {
    double low = 0.0;
    double high = 0.0;
};

/// Frobenius norms of the low band and of all detail bands taken together.
inline BandNorms band_norms(const Tensor4& x, const TransformKind& transform) {
    std::vector<Tensor4> bands = decompose(x, transform);
    BandNorms n;
    double high = 0.0;
    for (std::size_t i = 0; i + 1 < bands.size(); ++i) high += sum_squares(bands[i].data());
    n.high = std::sqrt(high);
    n.low = frobenius_norm(bands.back());
    return n;
}

struct BandNormRecord {
    std::size_t step = 0;
    double t = 0.0;
    double sigma = 0.0;
    double low_norm = 0.0;
    double high_norm = 0.0;
};

/// Per-run diagnostics. Owned by one sampling run, never shared across runs.
struct GuidanceTrace {
    std::vector<BandNormRecord> records;
    double update_low_energy = 0.0;  // summed over records, of guided - d_c
    double update_high_energy = 0.0;
};

/// One guided x0 prediction. Outside the interval the conditional prediction
/// is returned unchanged. With a trace, appends the band norms of d_c - d_u
/// and accumulates the band energies of the applied update.
inline Tensor4 guided_denoise(const Tensor4& z, double sigma, double t, const DenoiserPair& pair,
                              const Condition& y, const GuidanceConfig& cfg,
                              GuidanceTrace* trace = nullptr) {
    if (!(sigma > 0.0)) fail(ErrorKind::domain, "guided_denoise needs sigma > 0");
    Tensor4 d_c = pair.cond(z, sigma, y);
    require_same_dims(d_c, z, "conditional denoiser output");
    const bool active = !cfg.interval || cfg.interval->contains(t);
    if (!active && trace == nullptr) return d_c;
    Tensor4 d_u = pair.uncond(z, sigma);
    require_same_dims(d_u, z, "unconditional denoiser output");
    Tensor4 out = active ? freqcfg_combine(d_c, d_u, cfg) : d_c;
    if (trace != nullptr) {
        BandNorms n = band_norms(sub(d_c, d_u), cfg.transform);
        trace->records.push_back({trace->records.size(), t, sigma, n.low, n.high});
        BandNorms u = band_norms(sub(out, d_c), cfg.transform);
        trace->update_low_energy += u.low * u.low;
        trace->update_high_energy += u.high * u.high;
    }
    return out;
}

/// Index minimizing |low - high|; ties go to the earlier step.
inline std::size_t crossover_step(const std::vector<BandNormRecord>& records) {
    if (records.size() < 2) fail(ErrorKind::usage, "crossover_step needs at least 2 records");
    std::size_t best = 0;
    double gap = std::abs(records[0].low_norm - records[0].high_norm);
    for (std::size_t i = 1; i < records.size(); ++i) {
        const double g = std::abs(records[i].low_norm - records[i].high_norm);
        if (g < gap) {
            gap = g;
            best = i;
        }
    }
    return best;
}

/// First index where low - high reaches zero or changes sign relative to the
/// first record. Empty when the norms never cross.
inline std::optional<std::size_t> first_crossing_step(const std::vector<BandNormRecord>& records) {
    if (records.size() < 2) fail(ErrorKind::usage, "first_crossing_step needs at least 2 records");
    const double start = records[0].low_norm - records[0].high_norm;
    if (start == 0.0) return 0;
    for (std::size_t i = 1; i < records.size(); ++i) {
        const double g = records[i].low_norm - records[i].high_norm;
        if (g == 0.0 || (g > 0.0) != (start > 0.0)) return i;
    }
    return std::nullopt;
}

} // namespace freqguide
