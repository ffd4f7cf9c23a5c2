// SPDX-License-Identifier: Apache-2.0
//
// secure-isac: secure dual-functional sensing/communication frame design
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------
//
// Evaluation checks: constellation membership for designed frames, SER
// limits, eavesdropping SINR identities, frame SNR, and the tradeoff sweep.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <isac/array_model.hpp>
#include <isac/bfim.hpp>
#include <isac/evaluate.hpp>
#include <isac/precoder.hpp>
#include <isac/priors.hpp>
#include <isac/util.hpp>

#include <cmath>

using namespace isac;

namespace
{
    struct Fixture
    {
        SystemConfig cfg;
        CommChannelSet ch;
        SymbolFrame sym;
        TargetPriorSet pri;
        ExpectationFactors factors;
        std::vector<double> gamma_db, tau_db;
        DesignResult design;

        Fixture()
        {
            cfg.n_tx = 4;
            cfg.n_rx = 4;
            cfg.n_slots = 6;
            cfg.n_users = 2;
            cfg.n_targets = 1;
            cfg.power_budget_dbm = 20.0;
            cfg.psk_order = 4;
            cfg.validate();
            ch = generate_rayleigh_channels(cfg, 61);
            sym = random_symbol_frame(cfg, 62);
            pri.sigma0_sq = 0.5;
            pri.targets = {{0.4, 0.08, 1.0}};
            Rng rng(63);
            factors = expectation_factors(pri, cfg, 40, rng);
            gamma_db = {6.0, 6.0};
            tau_db = {-5.0};

            SolverOptions opts;
            opts.max_outer = 20;
            design = sca_design(cfg, ch, sym, pri, factors, gamma_db, tau_db, opts);
        }
    };

    const Fixture &fixture()
    {
        static Fixture fx;
        return fx;
    }
}

TEST_CASE("designed frames place every point in its region")
{
    const Fixture &fx = fixture();
    ConstellationTable tab = received_constellation(
        fx.design.x_frame, fx.ch, fx.pri, fx.sym, fx.gamma_db, fx.tau_db,
        fx.design.report.chosen_case, fx.cfg);

    REQUIRE(int(tab.users.size()) == fx.cfg.n_users * fx.cfg.n_slots);
    REQUIRE(int(tab.eves.size()) == fx.cfg.n_targets * fx.cfg.n_slots);
    for (const auto &p : tab.users)
    {
        CHECK(p.margin >= -1e-6);
        CHECK(p.in_region);
    }
    for (const auto &p : tab.eves)
        CHECK(p.in_region);
}

TEST_CASE("vanishing receiver noise drives the user SER to zero")
{
    const Fixture &fx = fixture();
    SystemConfig quiet = fx.cfg;
    quiet.noise_cu_dbm.assign(size_t(quiet.n_users), -100.0);
    Rng rng(70);
    SerResult ser = simulate_ser(fx.design.x_frame, fx.ch, fx.pri, fx.sym,
                                 quiet, 20000, rng);
    for (double p : ser.user_ser)
        CHECK(p == 0.0);
    CHECK(ser.trials == 20000);
}

TEST_CASE("pure-noise reception approaches the uniform-guess error rate")
{
    const Fixture &fx = fixture();
    Eigen::MatrixXcd zero = Eigen::MatrixXcd::Zero(fx.cfg.n_tx, fx.cfg.n_slots);
    Rng rng(71);
    long trials = 100000;
    SerResult ser = simulate_ser(zero, fx.ch, fx.pri, fx.sym, fx.cfg, trials, rng);
    double expect = double(fx.cfg.psk_order - 1) / fx.cfg.psk_order;
    for (size_t k = 0; k < ser.user_ser.size(); ++k)
    {
        CHECK(std::abs(ser.user_ser[k] - expect) <= 3.0 * ser.user_halfwidth[k] / 1.96 + 1e-12);
        CHECK(ser.user_halfwidth[k] ==
              doctest::Approx(1.96 * std::sqrt(ser.user_ser[k] * (1.0 - ser.user_ser[k]) /
                                               double(trials))));
    }
    CHECK(ser.eve_avg_ser == doctest::Approx(expect).epsilon(0.02));
}

TEST_CASE("SER estimates are bit-identical for a fixed seed")
{
    const Fixture &fx = fixture();
    Rng a(72), b(72);
    SerResult r1 = simulate_ser(fx.design.x_frame, fx.ch, fx.pri, fx.sym, fx.cfg, 5000, a);
    SerResult r2 = simulate_ser(fx.design.x_frame, fx.ch, fx.pri, fx.sym, fx.cfg, 5000, b);
    for (size_t k = 0; k < r1.user_ser.size(); ++k)
        CHECK(r1.user_ser[k] == r2.user_ser[k]);
    CHECK(r1.eve_avg_ser == r2.eve_avg_ser);
}

TEST_CASE("eavesdropping SINR identities")
{
    const Fixture &fx = fixture();
    int nt = fx.cfg.n_tx, ns = fx.cfg.n_slots;
    Eigen::VectorXcd a = steering_vector(fx.pri.targets[0].mu, nt);
    double beta = fx.pri.targets[0].beta;

    // x_l reproducing user-0's symbol exactly at the Eve: distortion term
    // vanishes and SINR = 1/sigma_E^2
    Eigen::MatrixXcd x(nt, ns);
    for (int l = 0; l < ns; ++l)
        x.col(l) = a / (beta * double(nt)) * fx.sym.s(0, l);
    Eigen::MatrixXd sinr = eavesdrop_sinr(x, fx.pri, fx.sym, fx.cfg);
    CHECK(sinr(0, 0) ==
          doctest::Approx(1.0 / fx.cfg.noise_eve_mw(0)).epsilon(1e-9));

    Eigen::MatrixXd zero_sinr = eavesdrop_sinr(
        Eigen::MatrixXcd::Zero(nt, ns), fx.pri, fx.sym, fx.cfg);
    CHECK(zero_sinr(0, 0) == doctest::Approx(0.0));

    // the secrecy-constrained design leaks less than the unconstrained
    // BCRB-only optimum at the same power
    ConstraintSet ball_only;
    ball_only.n_slots = ns;
    ball_only.dim = 2 * nt;
    ball_only.ball_radius_sq = ns * fx.cfg.power_budget_mw();
    Eigen::MatrixXd jp = prior_fim(fx.pri);
    Eigen::MatrixXcd x_free = Eigen::MatrixXcd::Constant(nt, ns, cplx(0.1, 0.0));
    for (int it = 0; it < 30; ++it)
    {
        Eigen::MatrixXcd g = bcrb_gradient(x_free, fx.factors, jp, fx.cfg, {});
        auto f = [&](const Eigen::MatrixXcd &xx) {
            return bcrb_of_frame(xx, fx.factors, jp, fx.cfg, {});
        };
        SubproblemSolution sub = solve_subproblem(g, ball_only);
        double predicted =
            (g.conjugate().cwiseProduct(sub.x_star - x_free)).sum().real();
        if (predicted > -1e-12)
            break;
        LineSearchResult ls = line_search(f, x_free, f(x_free), g, sub.x_star);
        if (ls.lambda == 0.0)
            break;
        x_free += ls.lambda * (sub.x_star - x_free);
    }
    double leak_free = eavesdrop_sinr(x_free, fx.pri, fx.sym, fx.cfg).row(0).mean();
    double leak_di = eavesdrop_sinr(fx.design.x_frame, fx.pri, fx.sym, fx.cfg).row(0).mean();
    CHECK(leak_di < leak_free);
}

TEST_CASE("frame SNR: zero input, QoS floor, quadratic scaling")
{
    const Fixture &fx = fixture();
    Eigen::VectorXd zero = frame_snr(
        Eigen::MatrixXcd::Zero(fx.cfg.n_tx, fx.cfg.n_slots), fx.ch, fx.cfg);
    CHECK(zero.norm() == doctest::Approx(0.0));

    Eigen::VectorXd snr = frame_snr(fx.design.x_frame, fx.ch, fx.cfg);
    for (int k = 0; k < fx.cfg.n_users; ++k)
    {
        double gamma_lin = std::pow(10.0, fx.gamma_db[size_t(k)] / 10.0);
        CHECK(snr[k] >= gamma_lin * (1.0 - 1e-9));
    }

    Eigen::VectorXd snr2 = frame_snr(2.0 * fx.design.x_frame, fx.ch, fx.cfg);
    CHECK((snr2 - 4.0 * snr).norm() < 1e-9 * snr.norm());
}

TEST_CASE("tradeoff sweep: monotone in QoS and power, CI beats block-level")
{
    SystemConfig cfg;
    cfg.n_tx = 4;
    cfg.n_rx = 4;
    cfg.n_slots = 6;
    cfg.n_users = 2;
    cfg.n_targets = 1;
    cfg.psk_order = 4;
    cfg.validate();
    TargetPriorSet pri;
    pri.sigma0_sq = 0.5;
    pri.targets = {{0.4, 0.08, 1.0}};

    std::vector<double> gammas = {0.0, 6.0};
    std::vector<double> powers = {17.0, 20.0};
    SolverOptions opts;
    opts.max_outer = 60;
    auto points = sweep_tradeoff(cfg, pri, gammas, powers, {-5.0}, {}, 40, opts);
    REQUIRE(points.size() == gammas.size() * powers.size());

    auto at = [&](double g, double p) -> const TradeoffPoint & {
        for (const auto &pt : points)
            if (pt.gamma_db == g && pt.power_budget_dbm == p)
                return pt;
        FAIL("missing grid point");
        return points.front();
    };

    for (double p : powers)
        for (double g : gammas)
        {
            const TradeoffPoint &pt = at(g, p);
            REQUIRE(pt.ci_feasible);
            REQUIRE(pt.block_feasible);
            // at this small scale the two designs land within a fraction of
            // a percent; the strict comparison runs at full scale elsewhere
            CHECK(pt.bcrb_ci <= pt.bcrb_block * (1.0 + 5e-3));
            CHECK(pt.winning_case >= 1);
            CHECK(pt.winning_case <= 3);
        }
    for (double p : powers)
        CHECK(at(0.0, p).bcrb_ci <= at(6.0, p).bcrb_ci * (1.0 + 1e-6));
    for (double g : gammas)
        CHECK(at(g, 20.0).bcrb_ci <= at(g, 17.0).bcrb_ci * (1.0 + 1e-6));
}
