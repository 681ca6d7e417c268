// Copyright (C) 2026 The freqguide Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "freqguide/config.hpp"
#include "freqguide/diffusion.hpp"
#include "freqguide/guidance.hpp"
#include "freqguide/io.hpp"
#include "freqguide/metrics.hpp"

namespace freqguide {

inline constexpr const char* tool_version = "freqguide 1.0.0";

/// Where a run's manifest goes for a given primary output.
inline std::filesystem::path manifest_path(const std::filesystem::path& out) {
    std::filesystem::path p = out;
    p += ".manifest.json";
    return p;
}

/// One manifest per run. Keys are sorted, so identical runs give identical bytes.
inline void write_manifest(const std::filesystem::path& out, const std::string& command,
                           const std::map<std::string, std::string>& config, std::uint64_t seed,
                           const std::vector<std::filesystem::path>& artifacts,
                           const nlohmann::json& results = nlohmann::json::object()) {
    nlohmann::json j;
    j["command"] = command;
    j["config"] = config;
    j["seed"] = seed;
    std::vector<std::string> paths;
    for (const auto& a : artifacts) paths.push_back(a.string());
    j["artifacts"] = paths;
    j["tool_version"] = tool_version;
    j["results"] = results;
    write_file_atomic(manifest_path(out), j.dump(2) + "\n");
}

inline Tensor4 cmd_sample(const ExperimentConfig& e, const std::filesystem::path& out) {
    const LabeledMixture model = build_model(e);
    const DenoiserPair pair = build_pair(e, model);
    Tensor4 x = sample(pair, e.run);
    write_tensor(out, x);
    write_manifest(out, "sample", resolved_values(e), e.run.seed, {out});
    return x;
}

struct CombineOptions {
    std::optional<double> w_low;
    std::optional<double> w_high;
    std::vector<double> scales;
    std::vector<double> parallel_weights;
    std::string transform = "laplacian";
    std::size_t levels = 1;
};

inline GuidanceConfig combine_guidance(const CombineOptions& o) {
    const bool pair = o.w_low || o.w_high;
    if (pair && !o.scales.empty())
        fail(ErrorKind::usage, "give either --w-low/--w-high or --scales, not both");
    GuidanceConfig g;
    if (o.transform == "haar") {
        if (o.levels != 1) fail(ErrorKind::usage, "haar transform has exactly one level");
        g.transform = TransformKind::haar();
    } else if (o.transform == "laplacian") {
        g.transform = TransformKind::laplacian(o.levels);
    } else {
        fail(ErrorKind::usage, "unknown transform '" + o.transform + "' (laplacian or haar)");
    }
    g.scales = pair ? expand_scales(g.transform, o.w_high, o.w_low)
                    : (o.scales.empty() ? std::vector<double>(g.transform.band_count(), 1.0) : o.scales);
    g.parallel_weights = o.parallel_weights;
    g.validate();
    return g;
}

inline Tensor4 cmd_combine(const std::filesystem::path& cond, const std::filesystem::path& uncond,
                           const CombineOptions& o, const std::filesystem::path& out) {
    const GuidanceConfig g = combine_guidance(o);
    const Tensor4 d_c = read_tensor(cond);
    const Tensor4 d_u = read_tensor(uncond);
    require_same_dims(d_c, d_u, "combine inputs");
    Tensor4 guided = freqcfg_combine(d_c, d_u, g);
    write_tensor(out, guided);
    std::map<std::string, std::string> cfg;
    cfg["cond"] = cond.string();
    cfg["uncond"] = uncond.string();
    cfg["guidance.transform"] = o.transform;
    cfg["guidance.levels"] = std::to_string(g.transform.levels);
    std::string s, pw;
    for (std::size_t i = 0; i < g.scales.size(); ++i) {
        s += (i ? "," : "") + format_double(g.scales[i]);
        pw += (i ? "," : "") + format_double(g.parallel_weight(i));
    }
    cfg["guidance.scales"] = s;
    cfg["guidance.parallel_weights"] = pw;
    write_manifest(out, "combine", cfg, 0, {out});
    return guided;
}

struct NormAnalysis {
    std::vector<BandNormRecord> records;
    std::size_t crossover = 0;
    std::optional<std::size_t> first_crossing;
    double low_trend = 0.0;  // smoothed Spearman against step
    double high_trend = 0.0;
};

inline NormAnalysis analyze_norms(const ExperimentConfig& e) {
    const LabeledMixture model = build_model(e);
    const DenoiserPair pair = build_pair(e, model);
    GuidanceTrace trace;
    sample(pair, e.run, &trace);
    NormAnalysis a;
    a.records = std::move(trace.records);
    std::vector<double> low, high;
    for (const auto& r : a.records) {
        low.push_back(r.low_norm);
        high.push_back(r.high_norm);
    }
    if (a.records.size() >= 2) {
        a.crossover = crossover_step(a.records);
        a.first_crossing = first_crossing_step(a.records);
        a.low_trend = trend(low);
        a.high_trend = trend(high);
    }
    return a;
}

inline NormAnalysis cmd_analyze_norms(const ExperimentConfig& e, const std::filesystem::path& out) {
    NormAnalysis a = analyze_norms(e);
    std::vector<std::vector<CsvCell>> rows;
    for (const auto& r : a.records)
        rows.push_back({static_cast<std::int64_t>(r.step), r.t, r.sigma, r.low_norm, r.high_norm});
    write_csv(out, {"step", "t", "sigma", "low_norm", "high_norm"}, rows);
    nlohmann::json res;
    res["crossover_step"] = a.crossover;
    res["first_crossing_step"] =
        a.first_crossing ? nlohmann::json(*a.first_crossing) : nlohmann::json(nullptr);
    res["low_trend"] = a.low_trend;
    res["high_trend"] = a.high_trend;
    write_manifest(out, "analyze-norms", resolved_values(e), e.run.seed, {out}, res);
    return a;
}

struct SweepRow {
    double w_low = 1.0;
    double w_high = 1.0;
    ModeReport modes;
    double saturation = 0.0;
    BandEnergy update_energy; // of guided - d_c, summed over steps
};

/// One sampling run per grid point, all from the same seed.
inline std::vector<SweepRow> run_sweep(const ExperimentConfig& e) {
    if (e.grid.empty()) fail(ErrorKind::usage, "sweep needs sweep.grid");
    if (e.run.condition.is_null()) fail(ErrorKind::usage, "sweep needs a class condition");
    const LabeledMixture model = build_model(e);
    const DenoiserPair pair = build_pair(e, model);
    const IsotropicGaussianMixture target =
        restrict_to_label(model.mixture, model.labels, *e.run.condition.label);
    const double tau = e.tau.value_or(default_tau(target));
    std::vector<SweepRow> rows;
    for (const auto& [w_low, w_high] : e.grid) {
        SampleRunConfig run = e.run;
        if (e.sweep_samples) run.batch = e.sweep_samples;
        run.guidance.scales = expand_scales(run.guidance.transform, w_high, w_low);
        GuidanceTrace trace;
        Tensor4 x = sample(pair, run, &trace);
        SweepRow row;
        row.w_low = w_low;
        row.w_high = w_high;
        row.modes = mode_report(x, target, tau);
        row.saturation = saturation_proxy(x, target);
        row.update_energy = energy_shares(trace.update_low_energy, trace.update_high_energy);
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::vector<SweepRow> cmd_sweep(const ExperimentConfig& e, const std::filesystem::path& out) {
    std::vector<SweepRow> rows = run_sweep(e);
    std::vector<std::vector<CsvCell>> cells;
    for (const auto& r : rows) {
        std::string hits;
        for (std::size_t i = 0; i < r.modes.hits.size(); ++i)
            hits += (i ? ";" : "") + std::to_string(r.modes.hits[i]);
        cells.push_back({r.w_low, r.w_high, r.modes.recall, r.modes.precision, r.modes.tau, hits,
                         r.saturation, r.update_energy.low_fraction, r.update_energy.high_fraction});
    }
    write_csv(out,
              {"w_low", "w_high", "recall", "precision", "tau", "mode_hits", "saturation",
               "update_low_fraction", "update_high_fraction"},
              cells);
    write_manifest(out, "sweep", resolved_values(e), e.run.seed, {out});
    return rows;
}

/// Writes the mean images and a per-component table next to them.
inline LabeledMixture cmd_gen_data(const ExperimentConfig& e, const std::filesystem::path& out) {
    LabeledMixture model = build_model(e);
    write_tensor(out, model.mixture.means);
    std::filesystem::path table = out;
    table += ".mixture.csv";
    std::vector<std::vector<CsvCell>> rows;
    for (std::size_t k = 0; k < model.mixture.size(); ++k)
        rows.push_back({static_cast<std::int64_t>(k), static_cast<std::int64_t>(model.labels[k]),
                        model.mixture.weights[k], model.mixture.scales[k]});
    write_csv(table, {"component", "label", "weight", "scale"}, rows);
    write_manifest(out, "gen-data", resolved_values(e), e.run.seed, {out, table});
    return model;
}

} // namespace freqguide
