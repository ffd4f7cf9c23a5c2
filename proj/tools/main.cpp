// SPDX-License-Identifier: Apache-2.0
//
// secure-isac: secure dual-functional sensing/communication frame design
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "isac/experiment.hpp"

namespace
{
    struct CommonArgs
    {
        std::string config_path;
        std::optional<std::uint64_t> seed;
        std::string out_dir;
        int workers = 1;
    };

    void add_common(CLI::App *cmd, CommonArgs &args)
    {
        cmd->add_option("--config", args.config_path, "Path to the JSON config")
            ->required();
        cmd->add_option("--seed", args.seed,
                        "Override every seed in the config with this base value");
        cmd->add_option("--out", args.out_dir, "Output directory (default from config)");
        cmd->add_option("--workers", args.workers, "Concurrent solver workers")
            ->check(CLI::PositiveNumber);
    }

    int dispatch(const std::string &name, const CommonArgs &args)
    {
        isac::CommandOutcome outcome;
        try
        {
            isac::ExperimentConfig cfg = isac::load_config(args.config_path);
            if (args.seed)
            {
                cfg.seeds.channel = *args.seed;
                cfg.seeds.factors = *args.seed + 1;
                cfg.seeds.symbols = *args.seed + 2;
                cfg.seeds.noise = *args.seed + 3;
            }
            std::string out_dir = args.out_dir.empty() ? cfg.output_dir : args.out_dir;
            if (name == "design")
                outcome = isac::run_design(cfg, out_dir);
            else if (name == "beampattern")
                outcome = isac::run_beampattern(cfg, out_dir);
            else if (name == "sweep")
                outcome = isac::run_sweep(cfg, out_dir, args.workers);
            else if (name == "ser")
                outcome = isac::run_ser(cfg, out_dir);
            else
                outcome = isac::run_factors(cfg, out_dir);
        }
        catch (const isac::ConfigError &e)
        {
            outcome.exit_code = isac::exit_config_error;
            outcome.message = e.what();
        }
        catch (const std::exception &e)
        {
            outcome.exit_code = isac::exit_numerical;
            outcome.message = e.what();
        }

        if (outcome.exit_code == isac::exit_ok)
        {
            std::printf("%s\n", outcome.message.c_str());
            for (const auto &f : outcome.files)
                std::printf("  wrote %s\n", f.c_str());
        }
        else
        {
            std::fprintf(stderr, "error: %s\n", outcome.message.c_str());
        }
        return outcome.exit_code;
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"secure-isac: BCRB-optimal secure sensing/communication frame design"};
    app.require_subcommand(1);

    const char *names[] = {"design", "beampattern", "sweep", "ser", "factors"};
    const char *descs[] = {
        "Design a transmit frame and emit X, report and constellations",
        "Design a frame and emit its normalized transmit beampattern",
        "BCRB-vs-QoS tradeoff grid against the block-level benchmark",
        "Monte-Carlo symbol error rates at users and eavesdroppers",
        "Precompute and cache the Bayesian FIM expectation factors"};
    CommonArgs args[5];
    for (int i = 0; i < 5; ++i)
        add_common(app.add_subcommand(names[i], descs[i]), args[i]);

    CLI11_PARSE(app, argc, argv);
    for (int i = 0; i < 5; ++i)
        if (app.get_subcommand(names[i])->parsed())
            return dispatch(names[i], args[i]);
    return isac::exit_config_error;
}
