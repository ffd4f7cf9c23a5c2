// SPDX-License-Identifier: Apache-2.0
//
// secure-isac: secure dual-functional sensing/communication frame design
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#include <benchmark/benchmark.h>

#include "isac/bfim.hpp"
#include "isac/precoder.hpp"

namespace
{
    isac::SystemConfig reference_config()
    {
        isac::SystemConfig cfg;
        cfg.n_tx = 12;
        cfg.n_rx = 10;
        cfg.n_slots = 100;
        cfg.n_users = 3;
        cfg.n_targets = 2;
        return cfg;
    }

    isac::TargetPriorSet reference_priors()
    {
        isac::TargetPriorSet pri;
        pri.sigma0_sq = 0.5;
        pri.targets.push_back({isac::deg_to_rad(-50.0), isac::deg_to_rad(5.0), 1.0});
        pri.targets.push_back({isac::deg_to_rad(-20.0), isac::deg_to_rad(5.0), 1.0});
        return pri;
    }
}

static void BM_SteeringVector(benchmark::State &state)
{
    for (auto _ : state)
        benchmark::DoNotOptimize(isac::steering_vector(0.3, 12));
}
BENCHMARK(BM_SteeringVector);

static void BM_ExpectationFactors(benchmark::State &state)
{
    auto cfg = reference_config();
    auto pri = reference_priors();
    for (auto _ : state)
    {
        isac::Rng rng(7);
        benchmark::DoNotOptimize(
            isac::expectation_factors(pri, cfg, int(state.range(0)), rng));
    }
}
BENCHMARK(BM_ExpectationFactors)->Arg(50)->Arg(200);

static void BM_BfimAssembly(benchmark::State &state)
{
    auto cfg = reference_config();
    auto pri = reference_priors();
    isac::Rng rng(7);
    auto factors = isac::expectation_factors(pri, cfg, 200, rng);
    Eigen::MatrixXd jp = isac::prior_fim(pri);
    Eigen::MatrixXcd x(cfg.n_tx, cfg.n_slots);
    for (int l = 0; l < cfg.n_slots; ++l)
        for (int i = 0; i < cfg.n_tx; ++i)
            x(i, l) = rng.cgaussian();
    for (auto _ : state)
        benchmark::DoNotOptimize(isac::bcrb_of_frame(x, factors, jp, cfg, {}));
}
BENCHMARK(BM_BfimAssembly);

static void BM_SubproblemSolve(benchmark::State &state)
{
    auto cfg = reference_config();
    auto pri = reference_priors();
    auto channels = isac::generate_rayleigh_channels(cfg, 1);
    auto symbols = isac::random_symbol_frame(cfg, 3);
    auto ci = isac::build_ci_constraints(channels, symbols, {15.0, 15.0, 15.0}, cfg);
    auto di = isac::build_di_constraints(1, pri, symbols, {-5.0, -5.0}, cfg);
    auto cs = isac::make_constraint_set(cfg, ci, di, 1);
    isac::Rng rng(9);
    Eigen::MatrixXcd g(cfg.n_tx, cfg.n_slots);
    for (int l = 0; l < cfg.n_slots; ++l)
        for (int i = 0; i < cfg.n_tx; ++i)
            g(i, l) = rng.cgaussian();
    for (auto _ : state)
        benchmark::DoNotOptimize(isac::solve_subproblem(g, cs));
}
BENCHMARK(BM_SubproblemSolve);

BENCHMARK_MAIN();
