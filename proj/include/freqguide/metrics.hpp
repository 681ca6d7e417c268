// Copyright (C) 2026 The freqguide Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "freqguide/analytic_models.hpp"
#include "freqguide/frequency.hpp"
#include "freqguide/tensor.hpp"

namespace freqguide {

struct ModeReport {
    std::vector<std::size_t> hits; // samples within tau, by nearest mode
    double recall = 0.0;            // modes with at least one hit
    double precision = 0.0;         // samples within tau of some mode
    double tau = 0.0;
};

/// Default mode radius: the typical distance of a draw from its own mean
/// (s sqrt(D)) plus a 3 s margin, using the largest component scale.
inline double default_tau(const IsotropicGaussianMixture& mix) {
    const double s = *std::max_element(mix.scales.begin(), mix.scales.end());
    const double D = static_cast<double>(mix.item_dims().item_size());
    return s * (std::sqrt(D) + 3.0);
}

inline ModeReport mode_report(const Tensor4& samples, const IsotropicGaussianMixture& mix, double tau) {
    if (!(tau > 0.0)) fail(ErrorKind::domain, "tau must be positive");
    if (samples.empty()) fail(ErrorKind::usage, "mode_report needs samples");
    const Dims md = mix.item_dims();
    const Dims sd = samples.dims();
    if (sd.channels != md.channels || sd.height != md.height || sd.width != md.width)
        fail(ErrorKind::shape, "samples " + sd.str() + " do not match mixture item dims " + md.str());
    ModeReport r;
    r.tau = tau;
    r.hits.assign(mix.size(), 0);
    std::size_t inside = 0;
    for (std::size_t b = 0; b < sd.batch; ++b) {
        auto x = samples.item(b);
        std::size_t best = 0;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < mix.size(); ++k) {
            auto mu = mix.means.item(k);
            double d2 = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double e = x[i] - mu[i];
                d2 += e * e;
            }
            if (d2 < best_d2) {
                best_d2 = d2;
                best = k;
            }
        }
        if (std::sqrt(best_d2) <= tau) {
            ++inside;
            ++r.hits[best];
        }
    }
    const auto covered = std::count_if(r.hits.begin(), r.hits.end(), [](std::size_t h) { return h > 0; });
    r.recall = static_cast<double>(covered) / static_cast<double>(mix.size());
    r.precision = static_cast<double>(inside) / static_cast<double>(sd.batch);
    return r;
}

struct BandEnergy {
    double low_fraction = 0.0;
    double high_fraction = 0.0;
};

/// Shares of squared norm in the low band and in the detail bands. Haar
/// shares are of the input energy. Pyramid bands are not orthogonal, so
/// pyramid shares are of the summed band energies. Zero input gives (0, 0).
inline BandEnergy band_energy_fraction(const Tensor4& x, const TransformKind& transform) {
    std::vector<Tensor4> bands = decompose(x, transform);
    double high = 0.0;
    for (std::size_t i = 0; i + 1 < bands.size(); ++i) high += sum_squares(bands[i].data());
    const double low = sum_squares(bands.back().data());
    const double total =
        transform.family == TransformKind::Family::haar ? sum_squares(x.data()) : low + high;
    if (total == 0.0) return {};
    return {low / total, high / total};
}

/// Splits energies already accumulated per band into shares.
inline BandEnergy energy_shares(double low_energy, double high_energy) {
    const double total = low_energy + high_energy;
    if (total == 0.0) return {};
    return {low_energy / total, high_energy / total};
}

namespace detail {

struct ChannelStats {
    double mean = 0.0;
    double stddev = 0.0;
};

/// Weighted per-channel mean and standard deviation over items and pixels.
inline std::vector<ChannelStats> channel_stats(const Tensor4& t, const std::vector<double>& weights) {
    const Dims d = t.dims();
    std::vector<ChannelStats> out(d.channels);
    const double plane = static_cast<double>(d.plane_size());
    double wsum = 0.0;
    for (double w : weights) wsum += w;
    for (std::size_t c = 0; c < d.channels; ++c) {
        double m = 0.0;
        for (std::size_t b = 0; b < d.batch; ++b) {
            auto it = t.item(b).subspan(c * d.plane_size(), d.plane_size());
            m += weights[b] * std::accumulate(it.begin(), it.end(), 0.0) / plane;
        }
        m /= wsum;
        double v = 0.0;
        for (std::size_t b = 0; b < d.batch; ++b) {
            auto it = t.item(b).subspan(c * d.plane_size(), d.plane_size());
            double s = 0.0;
            for (double x : it) s += (x - m) * (x - m);
            v += weights[b] * s / plane;
        }
        out[c] = {m, std::sqrt(v / wsum)};
    }
    return out;
}

} // namespace detail

/// Per channel |mean gap| + |std gap| between samples and the weighted
/// mixture means, averaged over channels.
inline double saturation_proxy(const Tensor4& samples, const IsotropicGaussianMixture& reference) {
    if (samples.empty()) fail(ErrorKind::usage, "saturation_proxy needs samples");
    const Dims md = reference.item_dims();
    const Dims sd = samples.dims();
    if (sd.channels != md.channels || sd.height != md.height || sd.width != md.width)
        fail(ErrorKind::shape, "samples " + sd.str() + " do not match mixture item dims " + md.str());
    const auto s = detail::channel_stats(samples, std::vector<double>(sd.batch, 1.0));
    const auto r = detail::channel_stats(reference.means, reference.weights);
    double total = 0.0;
    for (std::size_t c = 0; c < s.size(); ++c)
        total += std::abs(s[c].mean - r[c].mean) + std::abs(s[c].stddev - r[c].stddev);
    return total / static_cast<double>(s.size());
}

/// Centered moving average; the window shrinks at the ends.
inline std::vector<double> moving_average(const std::vector<double>& x, std::size_t window) {
    if (window == 0) fail(ErrorKind::usage, "window must be positive");
    const std::size_t half = window / 2;
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const std::size_t lo = i >= half ? i - half : 0;
        const std::size_t hi = std::min(x.size(), i + half + 1);
        double s = 0.0;
        for (std::size_t j = lo; j < hi; ++j) s += x[j];
        out[i] = s / static_cast<double>(hi - lo);
    }
    return out;
}

/// Ranks starting at 1, ties get their average rank.
inline std::vector<double> average_ranks(const std::vector<double>& x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(x.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

/// Spearman rank correlation. Zero when either series is constant.
inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2)
        fail(ErrorKind::usage, "spearman needs two series of equal length >= 2");
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

/// Spearman correlation of a series against its index after smoothing.
inline double trend(const std::vector<double>& series, std::size_t window = 5) {
    std::vector<double> idx(series.size());
    std::iota(idx.begin(), idx.end(), 0.0);
    return spearman(idx, moving_average(series, window));
}

} // namespace freqguide
