// Copyright (C) 2026 The freqguide Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <random>

#include "freqguide/analytic_models.hpp"
#include "freqguide/diffusion.hpp"
#include "support.hpp"

using namespace freqguide;
using testing::error_kind_of;
using testing::kind;
using testing::random_tensor;

namespace {

struct GaussianProblem {
    double mean = 0.5;
    double scale = 2.0;
    Dims item{1, 3, 16, 16};

    IsotropicGaussianMixture mixture() const {
        Dims d = item;
        d.batch = 1;
        return make_mixture({1.0}, Tensor4(d, mean), {scale});
    }
    DenoiserPair pair() const {
        const auto mix = mixture();
        return make_denoiser_pair(mix, {0});
    }
    SampleRunConfig run(std::size_t steps, Sampler sampler) const {
        SampleRunConfig r;
        r.steps = steps;
        r.sampler = sampler;
        r.seed = 7;
        r.batch = 4;
        r.channels = item.channels;
        r.height = item.height;
        r.width = item.width;
        r.condition = Condition::of_class(0);
        return r;
    }
    // Closed-form endpoint of the probability-flow ODE.
    Tensor4 exact(const SampleRunConfig& r) const {
        const double smax = r.schedule.sigma_max;
        Tensor4 z = scaled(standard_normal(r.dims(), r.seed), smax);
        const double k = scale / std::sqrt(smax * smax + scale * scale);
        for (double& v : z.data()) v = mean + (v - mean) * k;
        return z;
    }
    double rel_error(std::size_t steps, Sampler sampler) const {
        const SampleRunConfig r = run(steps, sampler);
        const Tensor4 exact_z = exact(r);
        return frobenius_norm(sub(sample(pair(), r), exact_z)) / frobenius_norm(exact_z);
    }
};

} // namespace

TEST_CASE("karras grid examples") {
    CHECK(karras_grid(0.02, 10.0, 7.0, 1) == std::vector<double>{10.0, 0.0});
    const auto g = karras_grid(1.0, 4.0, 1.0, 3);
    REQUIRE(g.size() == 4);
    CHECK(g[0] == Catch::Approx(4.0));
    CHECK(g[1] == Catch::Approx(2.5));
    CHECK(g[2] == Catch::Approx(1.0));
    CHECK(g[3] == 0.0);
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const double smin = 0.001 + u(gen), smax = smin + 0.01 + 100 * u(gen), rho = 1 + 9 * u(gen);
        const auto s = karras_grid(smin, smax, rho, 2 + static_cast<std::size_t>(60 * u(gen)));
        CHECK(s.front() == Catch::Approx(smax).epsilon(1e-12));
        CHECK(s.back() == 0.0);
        for (std::size_t j = 0; j + 1 < s.size(); ++j) CHECK(s[j] > s[j + 1]);
    }
    CHECK(error_kind_of([] { karras_grid(2.0, 1.0, 7.0, 4); }) == kind(ErrorKind::domain));
    CHECK(error_kind_of([] { karras_grid(0.1, 1.0, 0.5, 4); }) == kind(ErrorKind::domain));
    CHECK(error_kind_of([] { karras_grid(0.1, 1.0, 7.0, 0); }) == kind(ErrorKind::domain));
}

TEST_CASE("schedule endpoints and times") {
    for (const NoiseSchedule& s : {NoiseSchedule::karras(0.02, 10.0, 7.0), NoiseSchedule::linear(10.0)}) {
        CHECK(s.sigma(0.0) == 0.0);
        CHECK(s.sigma(1.0) == Catch::Approx(10.0).epsilon(1e-14));
        const auto sig = s.sigmas(12);
        const auto ts = s.times(12);
        REQUIRE(ts.size() == sig.size());
        for (std::size_t i = 0; i < sig.size(); ++i)
            if (ts[i] > 0.0 || sig[i] == 0.0) CHECK(s.sigma(ts[i]) == Catch::Approx(sig[i]).epsilon(1e-12));
        CHECK(sig.front() == 10.0);
    }
    const auto k = NoiseSchedule::karras(0.02, 10.0, 7.0);
    CHECK(k.sigmas(12)[11] == 0.02);
    CHECK(k.times(12)[11] == 0.0);
    CHECK(k.sigma(1e-12) == Catch::Approx(0.02).epsilon(1e-9));
    CHECK(NoiseSchedule::linear(8.0).sigmas(4) == std::vector<double>{8.0, 6.0, 4.0, 2.0, 0.0});
}

TEST_CASE("ode_rhs") {
    const Tensor4 z = random_tensor({2, 3, 8, 8}, 1);
    CHECK(frobenius_norm(ode_rhs(z, 0.7, z)) == 0.0);
    const Tensor4 x0 = random_tensor({2, 3, 8, 8}, 2), eps = random_tensor({2, 3, 8, 8}, 3);
    CHECK(max_abs_diff(ode_rhs(scale_add(x0, eps, 1.5), 1.5, x0), eps) < 1e-14);
    // Single Gaussian: rhs = sigma (z - mu) / (s^2 + sigma^2).
    const GaussianProblem g;
    const auto pair = g.pair();
    const Tensor4 zz = random_tensor({1, 3, 16, 16}, 4, -5, 5);
    const double sigma = 1.3;
    const Tensor4 r = ode_rhs(zz, sigma, pair.cond(zz, sigma, Condition::of_class(0)));
    for (std::size_t i = 0; i < zz.size(); ++i)
        CHECK(r[i] == Catch::Approx(sigma * (zz[i] - g.mean) / (g.scale * g.scale + sigma * sigma)).epsilon(1e-12));
    CHECK(error_kind_of([&] { ode_rhs(z, 0.0, z); }) == kind(ErrorKind::domain));
}

TEST_CASE("one Euler step collapses onto a constant prediction") {
    DenoiserPair constant{[](const Tensor4& z, double, const Condition&) { return Tensor4(z.dims(), 0.25); },
                          [](const Tensor4& z, double) { return Tensor4(z.dims(), 0.25); }};
    SampleRunConfig r;
    r.steps = 1;
    r.sampler = Sampler::euler;
    r.batch = 3;
    r.seed = 5;
    const Tensor4 z = sample(constant, r);
    CHECK(max_abs_diff(z, Tensor4(z.dims(), 0.25)) < 1e-14);
}

TEST_CASE("first evaluation at sigma_max and one record per step") {
    std::vector<double> seen;
    DenoiserPair spy{[&](const Tensor4& z, double s, const Condition&) {
                         seen.push_back(s);
                         return scaled(z, 0.5);
                     },
                     [](const Tensor4& z, double) { return scaled(z, 0.25); }};
    SampleRunConfig r;
    r.steps = 10;
    r.batch = 1;
    r.guidance = GuidanceConfig::two_band(2.0, 2.0);
    GuidanceTrace trace;
    sample(spy, r, &trace);
    const auto sig = r.schedule.sigmas(10);
    CHECK(seen.front() == sig[0]);
    CHECK(seen.size() == 19); // Heun: two evaluations per step, one on the final step
    REQUIRE(trace.records.size() == 10);
    const auto ts = r.schedule.times(10);
    for (std::size_t i = 0; i < 10; ++i) {
        CHECK(trace.records[i].t == ts[i]);
        CHECK(trace.records[i].sigma == sig[i]);
    }
}

TEST_CASE("single Gaussian endpoint and order of accuracy") {
    const GaussianProblem g;
    CHECK(g.rel_error(64, Sampler::heun) < 1e-3);
    const double e16 = g.rel_error(16, Sampler::euler), e32 = g.rel_error(32, Sampler::euler);
    CHECK(e32 / e16 >= 0.4);
    CHECK(e32 / e16 <= 0.6);
    const double h16 = g.rel_error(16, Sampler::heun), h32 = g.rel_error(32, Sampler::heun);
    INFO("euler ratio " << e32 / e16 << " heun ratio " << h32 / h16);
    CHECK(h32 / h16 >= 0.18);
    CHECK(h32 / h16 <= 0.33);
}

TEST_CASE("sampling is deterministic and per-item noise ignores batch size") {
    const auto spec = BlobTextureSpec{};
    const LabeledMixture m = blob_mixture_from_spec(spec);
    const DenoiserPair pair = make_denoiser_pair(m.mixture, m.labels);
    SampleRunConfig r;
    r.steps = 8;
    r.batch = 3;
    r.seed = 42;
    r.condition = Condition::of_class(1);
    r.guidance = GuidanceConfig::two_band(2.0, 3.0);
    const Tensor4 a = sample(pair, r), b = sample(pair, r);
    CHECK(std::memcmp(a.data().data(), b.data().data(), a.size() * sizeof(double)) == 0);
    r.batch = 5;
    const Tensor4 c = sample(pair, r);
    CHECK(max_abs_diff(slice_batch(c, 0, 3), a) == 0.0);
    const Tensor4 n4 = standard_normal({4, 1, 2, 2}, 9), n3 = standard_normal({3, 1, 2, 2}, 9);
    CHECK(max_abs_diff(slice_batch(n4, 0, 3), n3) == 0.0);
}

TEST_CASE("unit scales are neutral") {
    const LabeledMixture m = blob_mixture_from_spec(BlobTextureSpec{});
    const DenoiserPair pair = make_denoiser_pair(m.mixture, m.labels);
    const DenoiserPair bypass{pair.cond, [&](const Tensor4& z, double s) { return pair.cond(z, s, Condition::of_class(0)); }};
    SampleRunConfig r;
    r.steps = 6;
    r.batch = 2;
    r.seed = 3;
    r.condition = Condition::of_class(0);
    r.guidance = GuidanceConfig::uniform(TransformKind::laplacian(2), 1.0);
    const Tensor4 freq = sample(pair, r);
    r.guidance = GuidanceConfig::uniform(TransformKind::haar(), 1.0);
    const Tensor4 haar = sample(pair, r);
    const Tensor4 plain = sample(bypass, r);
    CHECK(max_abs_diff(freq, plain) <= 1e-9);
    CHECK(max_abs_diff(haar, plain) <= 1e-9);
}

TEST_CASE("infeasible pyramid is reported before sampling") {
    int calls = 0;
    DenoiserPair counting{[&](const Tensor4& z, double, const Condition&) { ++calls; return z; },
                          [&](const Tensor4& z, double) { ++calls; return z; }};
    SampleRunConfig r;
    r.height = 16;
    r.width = 16;
    r.guidance = GuidanceConfig::uniform(TransformKind::laplacian(3), 2.0);
    CHECK(error_kind_of([&] { sample(counting, r); }) == kind(ErrorKind::shape));
    CHECK(calls == 0);
}
