// Copyright (C) 2026 The freqguide Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "freqguide/analytic_models.hpp"
#include "freqguide/diffusion.hpp"
#include "freqguide/io.hpp"

namespace freqguide {

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

} // namespace detail

/// Flat "key = value" text. '#' starts a comment; blank lines are skipped.
class KeyValueConfig {
public:
    struct Entry {
        std::string value;
        std::size_t line = 0; // 0 for values set from flags
    };

    static KeyValueConfig parse(std::string_view text) {
        KeyValueConfig cfg;
        std::size_t line_no = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const auto nl = text.find('\n', pos);
            std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
            ++line_no;
            pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
            if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) throw ConfigError(line_no, "expected key = value");
            const std::string key(detail::trim(line.substr(0, eq)));
            if (key.empty()) throw ConfigError(line_no, "missing key");
            if (cfg.entries_.count(key)) throw ConfigError(line_no, "duplicate key " + key);
            cfg.entries_[key] = {std::string(detail::trim(line.substr(eq + 1))), line_no};
        }
        return cfg;
    }

    static KeyValueConfig load(const std::filesystem::path& path) { return parse(read_file(path)); }

    /// Flag override; replaces any file value.
    void set(const std::string& key, const std::string& value) { entries_[key] = {value, 0}; }

    /// Parses "key=value" as given on the command line.
    void set_assignment(std::string_view assignment) {
        const auto eq = assignment.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(0, "override '" + std::string(assignment) + "' is not key=value");
        set(std::string(detail::trim(assignment.substr(0, eq))),
            std::string(detail::trim(assignment.substr(eq + 1))));
    }

    bool has(const std::string& key) const { return entries_.count(key) > 0; }
    const std::map<std::string, Entry>& entries() const { return entries_; }

    void erase(const std::string& key) { entries_.erase(key); }

    void require_known(const std::set<std::string>& known) const {
        for (const auto& [key, e] : entries_)
            if (!known.count(key)) throw ConfigError(e.line, "unknown key " + key);
    }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto it = entries_.find(key);
        return it == entries_.end() ? fallback : it->second.value;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        return to_double(it->second.value, key, it->second.line);
    }

    std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        const std::string& v = it->second.value;
        std::uint64_t out = 0;
        auto res = std::from_chars(v.data(), v.data() + v.size(), out);
        if (res.ec != std::errc() || res.ptr != v.data() + v.size())
            throw ConfigError(it->second.line, key + ": expected a non-negative integer, got '" + v + "'");
        return out;
    }

    std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        return parse_doubles(it->second.value, key, it->second.line, ',');
    }

    std::size_t line_of(const std::string& key) const {
        auto it = entries_.find(key);
        return it == entries_.end() ? 0 : it->second.line;
    }

    static double to_double(std::string_view v, const std::string& key, std::size_t line) {
        double out = 0.0;
        v = detail::trim(v);
        auto res = std::from_chars(v.data(), v.data() + v.size(), out);
        if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out))
            throw ConfigError(line, key + ": expected a finite number, got '" + std::string(v) + "'");
        return out;
    }

    static std::vector<double> parse_doubles(std::string_view v, const std::string& key,
                                             std::size_t line, char sep) {
        std::vector<double> out;
        if (detail::trim(v).empty()) throw ConfigError(line, key + ": empty list");
        for (auto part : detail::split(v, sep)) out.push_back(to_double(part, key, line));
        return out;
    }

private:
    std::map<std::string, Entry> entries_;
};

enum class ModelKind { blob_texture, gaussian };
enum class UncondSource { null_condition, degraded };

/// Everything a CLI run needs, resolved from a KeyValueConfig.
struct ExperimentConfig {
    SampleRunConfig run;
    ModelKind model = ModelKind::blob_texture;
    BlobTextureSpec blob;
    double gaussian_mean = 0.0;
    double gaussian_scale = 1.0;
    UncondSource uncond = UncondSource::null_condition;
    double jitter = 0.1;
    double inflate = 1.5;
    std::uint64_t degrade_seed = 0;
    std::optional<double> tau;
    std::vector<std::pair<double, double>> grid; // (w_low, w_high)
    std::size_t sweep_samples = 0;               // 0 means run.batch
};

inline const std::set<std::string>& known_config_keys() {
    static const std::set<std::string> keys{
        "schedule.kind", "schedule.sigma_min", "schedule.sigma_max", "schedule.rho",
        "schedule.steps", "schedule.sampler", "run.seed", "run.batch", "run.class",
        "mixture.kind", "mixture.channels", "mixture.height", "mixture.width", "mixture.centers",
        "mixture.amplitudes", "mixture.radius", "mixture.colors", "mixture.texture_amplitude",
        "mixture.texture_frequency", "mixture.orientations", "mixture.phases",
        "mixture.phase_variants", "mixture.scale", "mixture.mean", "guidance.transform",
        "guidance.levels", "guidance.scales", "guidance.w_low", "guidance.w_high",
        "guidance.parallel_weights", "guidance.interval", "guidance.uncond", "guidance.jitter",
        "guidance.inflate", "guidance.degrade_seed", "metrics.tau", "sweep.grid", "sweep.samples"};
    return keys;
}

/// Per-band scales from either a full high-to-low list or a (w_high, w_low)
/// pair. The pair gives every detail band w_high and the low band w_low.
inline std::vector<double> expand_scales(const TransformKind& transform,
                                         std::optional<double> w_high, std::optional<double> w_low) {
    std::vector<double> s(transform.band_count(), w_high.value_or(1.0));
    s.back() = w_low.value_or(1.0);
    return s;
}

inline TransformKind parse_transform(const std::string& name, std::size_t levels, std::size_t line) {
    if (name == "laplacian") return TransformKind::laplacian(levels);
    if (name == "haar") {
        if (levels != 1) throw ConfigError(line, "haar transform has exactly one level");
        return TransformKind::haar();
    }
    throw ConfigError(line, "unknown transform '" + name + "' (laplacian or haar)");
}

inline ExperimentConfig load_experiment(const KeyValueConfig& kv) {
    kv.require_known(known_config_keys());
    ExperimentConfig e;
    SampleRunConfig& r = e.run;

    const std::string kind = kv.get_string("schedule.kind", "karras");
    if (kind == "karras")
        r.schedule = NoiseSchedule::karras(kv.get_double("schedule.sigma_min", 0.02),
                                           kv.get_double("schedule.sigma_max", 10.0),
                                           kv.get_double("schedule.rho", 7.0));
    else if (kind == "linear")
        r.schedule = NoiseSchedule::linear(kv.get_double("schedule.sigma_max", 10.0));
    else
        throw ConfigError(kv.line_of("schedule.kind"), "unknown schedule kind '" + kind + "'");
    try {
        r.schedule.validate();
    } catch (const Error& err) {
        throw ConfigError(kv.line_of("schedule.sigma_max"), err.what());
    }
    r.steps = kv.get_uint("schedule.steps", 40);
    if (r.steps < 1) throw ConfigError(kv.line_of("schedule.steps"), "schedule.steps must be >= 1");
    const std::string sampler = kv.get_string("schedule.sampler", "heun");
    if (sampler == "heun")
        r.sampler = Sampler::heun;
    else if (sampler == "euler")
        r.sampler = Sampler::euler;
    else
        throw ConfigError(kv.line_of("schedule.sampler"), "unknown sampler '" + sampler + "'");

    r.seed = kv.get_uint("run.seed", 0);
    r.batch = kv.get_uint("run.batch", 16);
    if (r.batch < 1) throw ConfigError(kv.line_of("run.batch"), "run.batch must be >= 1");
    const std::string cls = kv.get_string("run.class", "0");
    if (cls == "null")
        r.condition = Condition::null();
    else
        r.condition = Condition::of_class(static_cast<int>(kv.get_uint("run.class", 0)));

    const std::string model = kv.get_string("mixture.kind", "blob_texture");
    BlobTextureSpec& b = e.blob;
    b.channels = kv.get_uint("mixture.channels", b.channels);
    b.height = kv.get_uint("mixture.height", b.height);
    b.width = kv.get_uint("mixture.width", b.width);
    b.scale = kv.get_double("mixture.scale", b.scale);
    if (model == "gaussian") {
        e.model = ModelKind::gaussian;
        e.gaussian_mean = kv.get_double("mixture.mean", 0.0);
        e.gaussian_scale = kv.get_double("mixture.scale", 1.0);
        if (!(e.gaussian_scale > 0.0)) throw ConfigError(kv.line_of("mixture.scale"), "mixture.scale must be positive");
        if (b.channels == 0 || b.height == 0 || b.width == 0)
            throw ConfigError(kv.line_of("mixture.channels"), "image size must be positive");
    } else if (model == "blob_texture") {
        e.model = ModelKind::blob_texture;
        if (kv.has("mixture.centers")) {
            b.centers.clear();
            const std::string centers_text = kv.get_string("mixture.centers", "");
            for (auto part : detail::split(centers_text, ',')) {
                auto yx = KeyValueConfig::parse_doubles(part, "mixture.centers", kv.line_of("mixture.centers"), ':');
                if (yx.size() != 2)
                    throw ConfigError(kv.line_of("mixture.centers"), "centers are y:x pairs");
                b.centers.push_back({yx[0], yx[1]});
            }
        }
        b.amplitudes = kv.get_doubles("mixture.amplitudes", b.amplitudes);
        b.radius = kv.get_double("mixture.radius", b.radius);
        if (kv.has("mixture.colors")) {
            b.class_colors.clear();
            const std::string colors_text = kv.get_string("mixture.colors", "");
            for (auto part : detail::split(colors_text, ';'))
                b.class_colors.push_back(
                    KeyValueConfig::parse_doubles(part, "mixture.colors", kv.line_of("mixture.colors"), ','));
        }
        b.texture_amplitude = kv.get_double("mixture.texture_amplitude", b.texture_amplitude);
        b.texture_frequency = kv.get_double("mixture.texture_frequency", b.texture_frequency);
        b.orientations = kv.get_doubles("mixture.orientations", b.orientations);
        b.phases = kv.get_doubles("mixture.phases", b.phases);
        b.phase_variants = kv.get_uint("mixture.phase_variants", b.phase_variants);
        try {
            b.validate();
        } catch (const Error& err) {
            throw ConfigError(0, err.what());
        }
    } else {
        throw ConfigError(kv.line_of("mixture.kind"), "unknown mixture kind '" + model + "'");
    }
    r.channels = b.channels;
    r.height = b.height;
    r.width = b.width;

    GuidanceConfig& g = r.guidance;
    const std::size_t levels = kv.get_uint("guidance.levels", 1);
    g.transform = parse_transform(kv.get_string("guidance.transform", "laplacian"), levels,
                                  kv.line_of("guidance.transform"));
    const bool pair = kv.has("guidance.w_low") || kv.has("guidance.w_high");
    if (pair && kv.has("guidance.scales"))
        throw ConfigError(kv.line_of("guidance.scales"),
                          "give either guidance.scales or guidance.w_low/w_high, not both");
    if (pair) {
        std::optional<double> wl, wh;
        if (kv.has("guidance.w_low")) wl = kv.get_double("guidance.w_low", 1.0);
        if (kv.has("guidance.w_high")) wh = kv.get_double("guidance.w_high", 1.0);
        g.scales = expand_scales(g.transform, wh, wl);
    } else {
        g.scales = kv.get_doubles("guidance.scales", std::vector<double>(g.transform.band_count(), 1.0));
    }
    g.parallel_weights = kv.get_doubles("guidance.parallel_weights", {});
    if (kv.has("guidance.interval")) {
        auto iv = kv.get_doubles("guidance.interval", {});
        if (iv.size() != 2)
            throw ConfigError(kv.line_of("guidance.interval"), "interval is t_start, t_end");
        if (!(0.0 <= iv[1] && iv[1] < iv[0] && iv[0] <= 1.0))
            throw ConfigError(kv.line_of("guidance.interval"), "interval needs 0 <= t_end < t_start <= 1");
        g.interval = Interval{iv[0], iv[1]};
    }
    try {
        g.validate();
        check_transform(g.transform, r.dims());
    } catch (const Error& err) {
        throw ConfigError(kv.line_of(kv.has("guidance.scales") ? "guidance.scales" : "guidance.levels"),
                          err.what());
    }

    const std::string uncond = kv.get_string("guidance.uncond", "null");
    if (uncond == "null")
        e.uncond = UncondSource::null_condition;
    else if (uncond == "degraded")
        e.uncond = UncondSource::degraded;
    else
        throw ConfigError(kv.line_of("guidance.uncond"), "guidance.uncond is null or degraded");
    e.jitter = kv.get_double("guidance.jitter", e.jitter);
    e.inflate = kv.get_double("guidance.inflate", e.inflate);
    e.degrade_seed = kv.get_uint("guidance.degrade_seed", e.degrade_seed);
    if (e.jitter < 0.0) throw ConfigError(kv.line_of("guidance.jitter"), "guidance.jitter must be >= 0");
    if (e.inflate < 1.0) throw ConfigError(kv.line_of("guidance.inflate"), "guidance.inflate must be >= 1");
    if (e.uncond == UncondSource::degraded && r.condition.is_null())
        throw ConfigError(kv.line_of("run.class"), "degraded guidance needs a class condition");

    if (kv.has("metrics.tau")) {
        e.tau = kv.get_double("metrics.tau", 0.0);
        if (!(*e.tau > 0.0)) throw ConfigError(kv.line_of("metrics.tau"), "metrics.tau must be positive");
    }
    if (kv.has("sweep.grid")) {
        const std::string grid_text = kv.get_string("sweep.grid", "");
        for (auto part : detail::split(grid_text, ',')) {
            auto p = KeyValueConfig::parse_doubles(part, "sweep.grid", kv.line_of("sweep.grid"), ':');
            if (p.size() != 2) throw ConfigError(kv.line_of("sweep.grid"), "grid points are w_low:w_high");
            e.grid.emplace_back(p[0], p[1]);
        }
    }
    e.sweep_samples = kv.get_uint("sweep.samples", 0);
    return e;
}

/// Effective values of every key, for run manifests.
inline std::map<std::string, std::string> resolved_values(const ExperimentConfig& e) {
    auto num = [](double v) { return format_double(v); };
    auto list = [&](const std::vector<double>& v, const char* sep) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + num(v[i]);
        return s;
    };
    const SampleRunConfig& r = e.run;
    std::map<std::string, std::string> m;
    const bool karras = r.schedule.kind == NoiseSchedule::Kind::karras;
    m["schedule.kind"] = karras ? "karras" : "linear";
    if (karras) {
        m["schedule.sigma_min"] = num(r.schedule.sigma_min);
        m["schedule.rho"] = num(r.schedule.rho);
    }
    m["schedule.sigma_max"] = num(r.schedule.sigma_max);
    m["schedule.steps"] = std::to_string(r.steps);
    m["schedule.sampler"] = r.sampler == Sampler::heun ? "heun" : "euler";
    m["run.seed"] = std::to_string(r.seed);
    m["run.batch"] = std::to_string(r.batch);
    m["run.class"] = r.condition.str();
    m["mixture.channels"] = std::to_string(r.channels);
    m["mixture.height"] = std::to_string(r.height);
    m["mixture.width"] = std::to_string(r.width);
    if (e.model == ModelKind::gaussian) {
        m["mixture.kind"] = "gaussian";
        m["mixture.mean"] = num(e.gaussian_mean);
        m["mixture.scale"] = num(e.gaussian_scale);
    } else {
        const BlobTextureSpec& b = e.blob;
        m["mixture.kind"] = "blob_texture";
        std::string centers;
        for (std::size_t i = 0; i < b.centers.size(); ++i)
            centers += (i ? "," : "") + num(b.centers[i][0]) + ":" + num(b.centers[i][1]);
        m["mixture.centers"] = centers;
        m["mixture.amplitudes"] = list(b.amplitudes, ",");
        m["mixture.radius"] = num(b.radius);
        std::string colors;
        for (std::size_t i = 0; i < b.class_colors.size(); ++i)
            colors += (i ? ";" : "") + list(b.class_colors[i], ",");
        m["mixture.colors"] = colors;
        m["mixture.texture_amplitude"] = num(b.texture_amplitude);
        m["mixture.texture_frequency"] = num(b.texture_frequency);
        m["mixture.orientations"] = list(b.orientations, ",");
        m["mixture.phases"] = list(b.phases, ",");
        m["mixture.phase_variants"] = std::to_string(b.phase_variants);
        m["mixture.scale"] = num(b.scale);
    }
    const GuidanceConfig& g = r.guidance;
    m["guidance.transform"] = g.transform.family == TransformKind::Family::haar ? "haar" : "laplacian";
    m["guidance.levels"] = std::to_string(g.transform.levels);
    m["guidance.scales"] = list(g.scales, ",");
    std::vector<double> pw(g.scales.size());
    for (std::size_t i = 0; i < pw.size(); ++i) pw[i] = g.parallel_weight(i);
    m["guidance.parallel_weights"] = list(pw, ",");
    if (g.interval) m["guidance.interval"] = num(g.interval->t_start) + "," + num(g.interval->t_end);
    m["guidance.uncond"] = e.uncond == UncondSource::degraded ? "degraded" : "null";
    if (e.uncond == UncondSource::degraded) {
        m["guidance.jitter"] = num(e.jitter);
        m["guidance.inflate"] = num(e.inflate);
        m["guidance.degrade_seed"] = std::to_string(e.degrade_seed);
    }
    if (e.tau) m["metrics.tau"] = num(*e.tau);
    if (!e.grid.empty()) {
        std::string grid;
        for (std::size_t i = 0; i < e.grid.size(); ++i)
            grid += (i ? "," : "") + num(e.grid[i].first) + ":" + num(e.grid[i].second);
        m["sweep.grid"] = grid;
    }
    if (e.sweep_samples) m["sweep.samples"] = std::to_string(e.sweep_samples);
    return m;
}

/// The analytic data model a config describes.
inline LabeledMixture build_model(const ExperimentConfig& e) {
    if (e.model == ModelKind::gaussian) {
        const Dims d{1, e.run.channels, e.run.height, e.run.width};
        return {make_mixture({1.0}, Tensor4(d, e.gaussian_mean), {e.gaussian_scale}), {0}};
    }
    return blob_mixture_from_spec(e.blob);
}

inline DenoiserPair build_pair(const ExperimentConfig& e, const LabeledMixture& model) {
    if (e.uncond == UncondSource::degraded)
        return make_autoguidance_pair(model.mixture, model.labels, *e.run.condition.label, e.jitter,
                                      e.inflate, e.degrade_seed);
    return make_denoiser_pair(model.mixture, model.labels);
}

} // namespace freqguide
