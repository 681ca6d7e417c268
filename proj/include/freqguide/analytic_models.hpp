// Copyright (C) 2026 The freqguide Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "freqguide/guidance.hpp"
#include "freqguide/parallel.hpp"
#include "freqguide/random.hpp"
#include "freqguide/tensor.hpp"

namespace freqguide {

/// Mixture of isotropic Gaussians N(mu_k, s_k^2 I). means holds one
/// component per batch entry.
struct IsotropicGaussianMixture {
    std::vector<double> weights;
    Tensor4 means;
    std::vector<double> scales;

    std::size_t size() const { return weights.size(); }
    Dims item_dims() const {
        Dims d = means.dims();
        d.batch = 1;
        return d;
    }

    void validate() const {
        if (weights.empty()) fail(ErrorKind::config, "mixture has no components");
        if (means.batch() != weights.size() || scales.size() != weights.size())
            fail(ErrorKind::config, "mixture weights, means and scales disagree in count");
        double total = 0.0;
        for (double w : weights) {
            if (!(w > 0.0) || !std::isfinite(w)) fail(ErrorKind::config, "mixture weights must be positive");
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-12) fail(ErrorKind::config, "mixture weights must sum to 1");
        for (double s : scales)
            if (!(s > 0.0) || !std::isfinite(s)) fail(ErrorKind::config, "mixture scales must be positive");
        require_finite(means, "mixture means");
    }
};

/// Builds a mixture, normalizing the weights.
inline IsotropicGaussianMixture make_mixture(std::vector<double> weights, Tensor4 means,
                                             std::vector<double> scales) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) fail(ErrorKind::config, "mixture weights must be positive");
    for (double& w : weights) w /= total;
    IsotropicGaussianMixture m{std::move(weights), std::move(means), std::move(scales)};
    m.validate();
    return m;
}

/// E[x | z] for x ~ mix and z = x + sigma * noise.
inline Tensor4 posterior_mean(const Tensor4& z, double sigma, const IsotropicGaussianMixture& mix) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
        fail(ErrorKind::domain, "posterior_mean needs finite sigma >= 0");
    const Dims md = mix.item_dims();
    const Dims zd = z.dims();
    if (zd.channels != md.channels || zd.height != md.height || zd.width != md.width)
        fail(ErrorKind::shape, "input " + zd.str() + " does not match mixture item dims " + md.str());
    require_finite(z, "posterior_mean input");
    if (sigma == 0.0) return z;
    const std::size_t K = mix.size();
    const double D = static_cast<double>(md.item_size());
    const double s2 = sigma * sigma;
    Tensor4 out(zd);
    parallel_for(zd.batch, [&](std::size_t b) {
        auto zi = z.item(b);
        std::vector<double> logp(K);
        for (std::size_t k = 0; k < K; ++k) {
            auto mu = mix.means.item(k);
            double d2 = 0.0;
            for (std::size_t i = 0; i < zi.size(); ++i) {
                const double e = zi[i] - mu[i];
                d2 += e * e;
            }
            const double v = mix.scales[k] * mix.scales[k] + s2;
            logp[k] = std::log(mix.weights[k]) - 0.5 * d2 / v - 0.5 * D * std::log(v);
        }
        const double top = *std::max_element(logp.begin(), logp.end());
        double total = 0.0;
        for (double& l : logp) {
            l = std::exp(l - top);
            total += l;
        }
        auto o = out.item(b);
        double zcoef = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            const double r = logp[k] / total;
            if (r == 0.0) continue;
            const double v = mix.scales[k] * mix.scales[k] + s2;
            zcoef += r * mix.scales[k] * mix.scales[k] / v;
            const double mcoef = r * s2 / v;
            auto mu = mix.means.item(k);
            for (std::size_t i = 0; i < o.size(); ++i) o[i] += mcoef * mu[i];
        }
        for (std::size_t i = 0; i < o.size(); ++i) o[i] += zcoef * zi[i];
    });
    return out;
}

/// Components with a given label, weights renormalized.
inline IsotropicGaussianMixture restrict_to_label(const IsotropicGaussianMixture& mix,
                                                  const std::vector<int>& labels, int label) {
    if (labels.size() != mix.size())
        fail(ErrorKind::config, "labeling must cover every mixture component");
    std::vector<double> w, s, data;
    for (std::size_t k = 0; k < mix.size(); ++k) {
        if (labels[k] != label) continue;
        w.push_back(mix.weights[k]);
        s.push_back(mix.scales[k]);
        auto mu = mix.means.item(k);
        data.insert(data.end(), mu.begin(), mu.end());
    }
    if (w.empty()) fail(ErrorKind::config, "class " + std::to_string(label) + " has no components");
    Dims d = mix.item_dims();
    d.batch = w.size();
    return make_mixture(std::move(w), Tensor4(d, std::move(data)), std::move(s));
}

/// A mixture plus a class label per component.
struct LabeledMixture {
    IsotropicGaussianMixture mixture;
    std::vector<int> labels;
};

/// cond uses the class-restricted mixture, uncond the full mixture.
inline DenoiserPair make_denoiser_pair(const IsotropicGaussianMixture& mix,
                                       const std::vector<int>& labels) {
    mix.validate();
    if (labels.size() != mix.size())
        fail(ErrorKind::config, "labeling must cover every mixture component");
    auto classes = std::make_shared<std::map<int, IsotropicGaussianMixture>>();
    for (int l : labels)
        if (!classes->count(l)) classes->emplace(l, restrict_to_label(mix, labels, l));
    auto full = std::make_shared<IsotropicGaussianMixture>(mix);
    DenoiserPair pair;
    pair.cond = [classes, full](const Tensor4& z, double sigma, const Condition& y) {
        if (y.is_null()) return posterior_mean(z, sigma, *full);
        auto it = classes->find(*y.label);
        if (it == classes->end())
            fail(ErrorKind::config, "class " + y.str() + " has no components");
        return posterior_mean(z, sigma, it->second);
    };
    pair.uncond = [full](const Tensor4& z, double sigma) { return posterior_mean(z, sigma, *full); };
    return pair;
}

/// Jitters means by jitter_scale * N(0, 1) per coordinate and multiplies
/// scales by inflate_factor. Component k uses noise stream k of seed.
inline IsotropicGaussianMixture degrade(const IsotropicGaussianMixture& mix, double jitter_scale,
                                        double inflate_factor, std::uint64_t seed) {
    if (!(jitter_scale >= 0.0) || !std::isfinite(jitter_scale))
        fail(ErrorKind::domain, "jitter scale must be >= 0");
    if (!(inflate_factor >= 1.0) || !std::isfinite(inflate_factor))
        fail(ErrorKind::domain, "inflate factor must be >= 1");
    IsotropicGaussianMixture out = mix;
    if (jitter_scale > 0.0) {
        for (std::size_t k = 0; k < out.size(); ++k) {
            NormalStream rng(seed, k);
            for (double& v : out.means.item(k)) v += jitter_scale * rng.normal();
        }
    }
    for (double& s : out.scales) s *= inflate_factor;
    return out;
}

/// Mean Euclidean norm of the component means.
inline double mean_component_norm(const IsotropicGaussianMixture& mix) {
    double total = 0.0;
    for (std::size_t k = 0; k < mix.size(); ++k) total += std::sqrt(sum_squares(mix.means.item(k)));
    return total / static_cast<double>(mix.size());
}

/// Pair whose uncond is a degraded copy of the class-restricted mixture.
/// relative_jitter is a fraction of the mean component norm, spread
/// evenly over coordinates.
inline DenoiserPair make_autoguidance_pair(const IsotropicGaussianMixture& mix,
                                           const std::vector<int>& labels, int label,
                                           double relative_jitter, double inflate_factor,
                                           std::uint64_t seed) {
    DenoiserPair pair = make_denoiser_pair(mix, labels);
    const IsotropicGaussianMixture cls = restrict_to_label(mix, labels, label);
    const double per_coord = relative_jitter * mean_component_norm(cls) /
                             std::sqrt(static_cast<double>(cls.item_dims().item_size()));
    auto weak = std::make_shared<IsotropicGaussianMixture>(degrade(cls, per_coord, inflate_factor, seed));
    pair.uncond = [weak](const Tensor4& z, double sigma) { return posterior_mean(z, sigma, *weak); };
    return pair;
}

/// Synthetic images: a Gaussian blob (low frequency) plus a cosine texture
/// (high frequency). Every combination of center, amplitude, texture phase
/// variant and class is one mixture component with equal weight.
struct BlobTextureSpec {
    std::size_t channels = 3;
    std::size_t height = 32;
    std::size_t width = 32;
    std::vector<std::array<double, 2>> centers{{8, 8}, {8, 24}, {24, 8}, {24, 24}}; // (y, x)
    std::vector<double> amplitudes{1.0};
    double radius = 8.0;
    std::vector<std::vector<double>> class_colors{{1.0, 0.5, 0.25}, {1.0, 0.5, 0.25}};
    double texture_amplitude = 0.3;
    double texture_frequency = 0.25; // cycles per pixel
    std::vector<double> orientations{0.0, std::numbers::pi / 2}; // per class, radians
    std::vector<double> phases{0.0, 0.0};                          // per class, radians
    std::size_t phase_variants = 1; // texture phase shifted by 2 pi p / phase_variants
    double scale = 0.05;

    std::size_t classes() const { return class_colors.size(); }
    std::size_t components() const {
        return centers.size() * amplitudes.size() * phase_variants * classes();
    }

    void validate() const {
        if (channels == 0 || height == 0 || width == 0)
            fail(ErrorKind::config, "image size must be positive");
        if (centers.empty()) fail(ErrorKind::config, "need at least one blob center");
        if (amplitudes.empty()) fail(ErrorKind::config, "need at least one blob amplitude");
        if (class_colors.empty()) fail(ErrorKind::config, "need at least one class");
        for (const auto& c : class_colors)
            if (c.size() != channels)
                fail(ErrorKind::config, "every class color needs one value per channel");
        if (orientations.size() != classes() || phases.size() != classes())
            fail(ErrorKind::config, "orientations and phases need one value per class");
        if (!(radius >= 8.0)) fail(ErrorKind::config, "blob radius must be >= 8 px");
        if (!(texture_frequency >= 0.25 && texture_frequency <= 0.5))
            fail(ErrorKind::config, "texture frequency must lie in [0.25, 0.5] cycles per pixel");
        if (!(texture_amplitude >= 0.0)) fail(ErrorKind::config, "texture amplitude must be >= 0");
        if (phase_variants < 1) fail(ErrorKind::config, "phase_variants must be >= 1");
        if (!(scale > 0.0)) fail(ErrorKind::config, "mixture scale must be positive");
        auto finite = [](double v) { return std::isfinite(v); };
        for (const auto& c : centers)
            if (!finite(c[0]) || !finite(c[1])) fail(ErrorKind::config, "blob centers must be finite");
        for (double a : amplitudes)
            if (!finite(a)) fail(ErrorKind::config, "blob amplitudes must be finite");
    }
};

/// Component order: center, amplitude, phase variant, class (fastest).
inline LabeledMixture blob_mixture_from_spec(const BlobTextureSpec& spec) {
    spec.validate();
    const std::size_t K = spec.components();
    const Dims d{K, spec.channels, spec.height, spec.width};
    Tensor4 means(d);
    std::vector<int> labels;
    std::size_t k = 0;
    const double two_pi = 2.0 * std::numbers::pi;
    for (const auto& center : spec.centers)
        for (double amp : spec.amplitudes)
            for (std::size_t p = 0; p < spec.phase_variants; ++p)
                for (std::size_t cls = 0; cls < spec.classes(); ++cls, ++k) {
                    const double ct = std::cos(spec.orientations[cls]);
                    const double st = std::sin(spec.orientations[cls]);
                    const double shift = spec.phases[cls] +
                                         two_pi * static_cast<double>(p) /
                                             static_cast<double>(spec.phase_variants);
                    for (std::size_t y = 0; y < spec.height; ++y)
                        for (std::size_t x = 0; x < spec.width; ++x) {
                            const double dy = static_cast<double>(y) - center[0];
                            const double dx = static_cast<double>(x) - center[1];
                            const double blob =
                                std::exp(-(dy * dy + dx * dx) / (2.0 * spec.radius * spec.radius));
                            const double tex =
                                spec.texture_amplitude *
                                std::cos(two_pi * spec.texture_frequency *
                                             (ct * static_cast<double>(x) + st * static_cast<double>(y)) +
                                         shift);
                            for (std::size_t c = 0; c < spec.channels; ++c)
                                means(k, c, y, x) = amp * spec.class_colors[cls][c] * blob + tex;
                        }
                    labels.push_back(static_cast<int>(cls));
                }
    return {make_mixture(std::vector<double>(K, 1.0), std::move(means),
                         std::vector<double>(K, spec.scale)),
            std::move(labels)};
}

/// n draws from the mixture. Draw i uses stream i of seed.
inline Tensor4 sample_mixture(const IsotropicGaussianMixture& mix, std::size_t n, std::uint64_t seed) {
    mix.validate();
    if (n == 0) fail(ErrorKind::usage, "need at least one sample");
    Dims d = mix.item_dims();
    d.batch = n;
    Tensor4 out(d);
    for (std::size_t i = 0; i < n; ++i) {
        NormalStream rng(seed, i);
        const double u = rng.uniform();
        std::size_t k = 0;
        double acc = mix.weights[0];
        while (u >= acc && k + 1 < mix.size()) acc += mix.weights[++k];
        auto mu = mix.means.item(k);
        auto o = out.item(i);
        for (std::size_t j = 0; j < o.size(); ++j) o[j] = mu[j] + mix.scales[k] * rng.normal();
    }
    return out;
}

inline Tensor4 sample_blob_texture(const BlobTextureSpec& spec, int label, std::uint64_t seed,
                                   std::size_t n) {
    LabeledMixture lm = blob_mixture_from_spec(spec);
    return sample_mixture(restrict_to_label(lm.mixture, lm.labels, label), n, seed);
}

} // namespace freqguide
