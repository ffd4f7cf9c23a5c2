// SPDX-License-Identifier: Apache-2.0
//
// secure-isac: secure dual-functional sensing/communication frame design
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#ifndef ISAC_EXPERIMENT_HPP
#define ISAC_EXPERIMENT_HPP

#include <optional>
#include <string>
#include <vector>

#include "isac/evaluate.hpp"

namespace isac
{
    // Exit codes shared by the CLI and the command runners
    inline constexpr int exit_ok = 0;
    inline constexpr int exit_config_error = 2;
    inline constexpr int exit_infeasible = 3;
    inline constexpr int exit_numerical = 4;

    struct SeedSet
    {
        std::uint64_t channel = 1;
        std::uint64_t factors = 2;
        std::uint64_t symbols = 3;
        std::uint64_t noise = 4;
    };

    struct ExperimentConfig
    {
        SystemConfig system;
        TargetPriorSet priors;
        std::vector<double> gamma_db; // per user
        std::vector<double> tau_db;   // per Eve
        double solver_epsilon = 1e-5;
        int solver_max_outer = 50;
        int factor_samples = 500;
        bool scale_prior_with_snr = false;
        double ridge = 0.0;
        SeedSet seeds;
        std::vector<double> sweep_gamma_grid_db;
        std::vector<double> sweep_power_list_dbm;
        long ser_trials = 100000;
        std::string output_dir = "out";

        SolverOptions solver_options() const;
    };

    // Parses and validates the versioned JSON document; throws ConfigError
    // naming the offending field (unknown keys included).
    ExperimentConfig load_config(const std::string &path);
    ExperimentConfig parse_config(const std::string &json_text);

    // FNV-1a over the canonicalized config document
    std::string config_hash(const ExperimentConfig &cfg);

    struct CommandOutcome
    {
        int exit_code = exit_ok;
        std::string message;
        std::vector<std::string> files; // written outputs (manifest last)
    };

    // Each command is a pure function of (config, seeds); outputs under
    // out_dir are byte-identical across re-runs (the run manifest records
    // wall-clock and is the one exception).
    CommandOutcome run_design(const ExperimentConfig &cfg, const std::string &out_dir);
    CommandOutcome run_beampattern(const ExperimentConfig &cfg, const std::string &out_dir);
    CommandOutcome run_sweep(const ExperimentConfig &cfg, const std::string &out_dir, int workers = 1);
    CommandOutcome run_ser(const ExperimentConfig &cfg, const std::string &out_dir);
    CommandOutcome run_factors(const ExperimentConfig &cfg, const std::string &out_dir);
}

#endif
