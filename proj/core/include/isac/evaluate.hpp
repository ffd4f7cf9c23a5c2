// SPDX-License-Identifier: Apache-2.0
//
// secure-isac: secure dual-functional sensing/communication frame design
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#ifndef ISAC_EVALUATE_HPP
#define ISAC_EVALUATE_HPP

#include <Eigen/Dense>
#include <vector>

#include "isac/precoder.hpp"

namespace isac
{
    struct ConstellationPoint
    {
        int entity = 0; // user or Eve index
        int slot = 0;
        cplx value;          // rotated noiseless observation
        double margin = 0.0; // CI margin (users) / winning-case margin (Eves)
        bool in_region = false;
    };

    struct ConstellationTable
    {
        std::vector<ConstellationPoint> users;
        std::vector<ConstellationPoint> eves; // region = the given DI case
    };

    ConstellationTable received_constellation(const Eigen::MatrixXcd &x_frame,
                                              const CommChannelSet &channels,
                                              const TargetPriorSet &priors,
                                              const SymbolFrame &symbols,
                                              const std::vector<double> &gamma_db,
                                              const std::vector<double> &tau_db,
                                              int di_case,
                                              const SystemConfig &cfg);

    struct SerResult
    {
        std::vector<double> user_ser;
        std::vector<double> user_halfwidth; // 95% binomial CI half-width
        // per (Eve, user) pair, row-major Eve x user
        Eigen::MatrixXd eve_ser;
        // mean over Eves decoding the protected reference stream (user 1)
        double eve_avg_ser = 0.0;
        double eve_avg_halfwidth = 0.0;
        long trials = 0;
    };

    // Monte-Carlo symbol error rate with phase-sector decisions on the
    // rotated observation; Eves attempt every user's stream.
    SerResult simulate_ser(const Eigen::MatrixXcd &x_frame,
                           const CommChannelSet &channels,
                           const TargetPriorSet &priors,
                           const SymbolFrame &symbols,
                           const SystemConfig &cfg,
                           long trials, Rng &rng);

    // SINR^E_{n,k} per footnote definition, one row per Eve, column per user
    Eigen::MatrixXd eavesdrop_sinr(const Eigen::MatrixXcd &x_frame,
                                   const TargetPriorSet &priors,
                                   const SymbolFrame &symbols,
                                   const SystemConfig &cfg);

    // mean_l |h_k^H x_l|^2 / sigma_k^2 per user
    Eigen::VectorXd frame_snr(const Eigen::MatrixXcd &x_frame,
                              const CommChannelSet &channels,
                              const SystemConfig &cfg);

    struct TradeoffPoint
    {
        double gamma_db = 0.0;
        double power_budget_dbm = 0.0;
        double bcrb_ci = 0.0;
        double bcrb_block = 0.0;
        bool ci_feasible = false;
        bool block_feasible = false;
        int winning_case = 0;
        std::string ci_termination;
    };

    struct SweepSeeds
    {
        std::uint64_t channel = 1;
        std::uint64_t factors = 2;
        std::uint64_t symbols = 3;
    };

    // Grid of (Gamma, P_T) designs on identical channels/priors/symbols.
    // Points are processed power-ascending / Gamma-descending and chained as
    // warm starts, which makes the reported BCRB monotone in both axes up to
    // solver tolerance. Infeasible points are marked and the sweep continues.
    std::vector<TradeoffPoint> sweep_tradeoff(const SystemConfig &cfg,
                                              const TargetPriorSet &priors,
                                              const std::vector<double> &gamma_grid_db,
                                              const std::vector<double> &power_list_dbm,
                                              const std::vector<double> &tau_db,
                                              const SweepSeeds &seeds,
                                              int n_factor_samples = 500,
                                              const SolverOptions &opts = {},
                                              std::vector<Eigen::MatrixXcd> *ci_frames = nullptr,
                                              std::vector<SolveReport> *ci_reports = nullptr);
}

#endif
