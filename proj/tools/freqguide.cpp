// Copyright (C) 2026 The freqguide Authors
// SPDX-License-Identifier: Apache-2.0

// freqguide: sample, combine, analyze-norms, sweep and gen-data front end.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "freqguide/commands.hpp"

namespace fg = freqguide;

namespace {

struct ConfigFlags {
    std::string config;
    std::vector<std::string> overrides;
    std::optional<std::size_t> steps;
    std::optional<std::string> sampler;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> batch;
    std::optional<std::string> scales;
    std::optional<double> w_low;
    std::optional<double> w_high;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& f) {
    cmd->add_option("-c,--config", f.config, "key = value config file")->required();
    cmd->add_option("--set", f.overrides, "override a config key (key=value), repeatable");
    cmd->add_option("--steps", f.steps, "sampling steps");
    cmd->add_option("--sampler", f.sampler, "heun or euler");
    cmd->add_option("--seed", f.seed, "noise seed");
    cmd->add_option("--batch", f.batch, "samples per run");
    cmd->add_option("--scales", f.scales, "guidance scales, high to low frequency");
    cmd->add_option("--w-low", f.w_low, "low band guidance scale");
    cmd->add_option("--w-high", f.w_high, "detail band guidance scale");
}

fg::ExperimentConfig resolve(const ConfigFlags& f) {
    fg::KeyValueConfig kv = fg::KeyValueConfig::load(f.config);
    for (const auto& o : f.overrides) kv.set_assignment(o);
    if (f.steps) kv.set("schedule.steps", std::to_string(*f.steps));
    if (f.sampler) kv.set("schedule.sampler", *f.sampler);
    if (f.seed) kv.set("run.seed", std::to_string(*f.seed));
    if (f.batch) kv.set("run.batch", std::to_string(*f.batch));
    if (f.scales && (f.w_low || f.w_high))
        fg::fail(fg::ErrorKind::usage, "give either --scales or --w-low/--w-high, not both");
    if (f.scales) {
        kv.erase("guidance.w_low");
        kv.erase("guidance.w_high");
        kv.set("guidance.scales", *f.scales);
    }
    if (f.w_low || f.w_high) {
        kv.erase("guidance.scales");
        if (f.w_low) kv.set("guidance.w_low", fg::format_double(*f.w_low));
        if (f.w_high) kv.set("guidance.w_high", fg::format_double(*f.w_high));
    }
    return fg::load_experiment(kv);
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
    return fg::KeyValueConfig::parse_doubles(text, what, 0, ',');
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Frequency-decoupled classifier-free guidance experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", fg::tool_version);

    ConfigFlags sample_flags;
    std::string sample_out;
    auto* sample_cmd = app.add_subcommand("sample", "draw guided samples into an FQG1 tensor");
    add_config_flags(sample_cmd, sample_flags);
    sample_cmd->add_option("-o,--out", sample_out, "output tensor path")->required();

    std::string cond_path, uncond_path, combine_out, scales_text, weights_text;
    fg::CombineOptions combine;
    auto* combine_cmd = app.add_subcommand("combine", "guide dumped cond/uncond predictions");
    combine_cmd->add_option("--cond", cond_path, "conditional x0 prediction (FQG1)")->required();
    combine_cmd->add_option("--uncond", uncond_path, "unconditional x0 prediction (FQG1)")->required();
    combine_cmd->add_option("--w-low", combine.w_low, "low band scale");
    combine_cmd->add_option("--w-high", combine.w_high, "detail band scale");
    combine_cmd->add_option("--scales", scales_text, "all band scales, high to low frequency");
    combine_cmd->add_option("--parallel-weights", weights_text, "per-band parallel weights");
    combine_cmd->add_option("--transform", combine.transform, "laplacian or haar");
    combine_cmd->add_option("--levels", combine.levels, "pyramid levels");
    combine_cmd->add_option("-o,--out", combine_out, "output tensor path")->required();

    ConfigFlags norms_flags;
    std::string norms_out, crossover_rule = "argmin";
    auto* norms_cmd = app.add_subcommand("analyze-norms", "per-step band norms of the guidance signal");
    add_config_flags(norms_cmd, norms_flags);
    norms_cmd->add_option("--crossover", crossover_rule, "argmin or first")
        ->check(CLI::IsMember({"argmin", "first"}));
    norms_cmd->add_option("-o,--out", norms_out, "output CSV path")->required();

    ConfigFlags sweep_flags;
    std::string sweep_out;
    std::optional<std::string> grid;
    std::optional<std::size_t> samples;
    auto* sweep_cmd = app.add_subcommand("sweep", "mode coverage over a (w_low, w_high) grid");
    add_config_flags(sweep_cmd, sweep_flags);
    sweep_cmd->add_option("--grid", grid, "w_low:w_high points, comma separated");
    sweep_cmd->add_option("--samples", samples, "samples per grid point");
    sweep_cmd->add_option("-o,--out", sweep_out, "output CSV path")->required();

    ConfigFlags gen_flags;
    std::string gen_out;
    auto* gen_cmd = app.add_subcommand("gen-data", "write mixture mean images and component table");
    add_config_flags(gen_cmd, gen_flags);
    gen_cmd->add_option("-o,--out", gen_out, "output tensor path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : fg::exit_code(fg::ErrorKind::usage);
    }

    try {
        if (*sample_cmd) {
            fg::cmd_sample(resolve(sample_flags), sample_out);
        } else if (*combine_cmd) {
            if (!scales_text.empty()) combine.scales = parse_list(scales_text, "--scales");
            if (!weights_text.empty())
                combine.parallel_weights = parse_list(weights_text, "--parallel-weights");
            fg::cmd_combine(cond_path, uncond_path, combine, combine_out);
        } else if (*norms_cmd) {
            const fg::NormAnalysis a = fg::cmd_analyze_norms(resolve(norms_flags), norms_out);
            if (crossover_rule == "first") {
                if (a.first_crossing)
                    std::cout << "first crossing step " << *a.first_crossing << "\n";
                else
                    std::cout << "norms never cross\n";
            } else {
                std::cout << "crossover step " << a.crossover << "\n";
            }
        } else if (*sweep_cmd) {
            if (grid) sweep_flags.overrides.push_back("sweep.grid=" + *grid);
            if (samples) sweep_flags.overrides.push_back("sweep.samples=" + std::to_string(*samples));
            fg::cmd_sweep(resolve(sweep_flags), sweep_out);
        } else if (*gen_cmd) {
            fg::cmd_gen_data(resolve(gen_flags), gen_out);
        }
    } catch (const fg::Error& e) {
        std::cerr << "error: " << fg::kind_name(e.kind()) << ": " << e.what() << "\n";
        return fg::exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: io_error: " << e.what() << "\n";
        return fg::exit_code(fg::ErrorKind::io);
    }
    return 0;
}
