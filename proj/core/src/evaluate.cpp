// SPDX-License-Identifier: Apache-2.0
//
// secure-isac: secure dual-functional sensing/communication frame design
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#include "isac/evaluate.hpp"

#include <algorithm>
#include <cmath>

namespace isac
{
    namespace
    {
        // signed slack of the destructive case region (>= 0 means inside)
        double di_margin(int di_case, cplx u, double tau, double tan_phi)
        {
            switch (di_case)
            {
            case 1:
                return tau - u.real();
            case 2:
                return std::min(u.imag() - (u.real() - tau) * tan_phi, u.real() - tau);
            case 3:
                return std::min(-u.imag() - (u.real() - tau) * tan_phi, u.real() - tau);
            default:
                throw ConfigError("di_case must be 1, 2 or 3");
            }
        }

        Eigen::VectorXcd eve_channel(const TargetPrior &tp, int n_tx)
        {
            return tp.beta * steering_vector(tp.mu, n_tx);
        }
    }

    ConstellationTable received_constellation(const Eigen::MatrixXcd &x_frame,
                                              const CommChannelSet &channels,
                                              const TargetPriorSet &priors,
                                              const SymbolFrame &symbols,
                                              const std::vector<double> &gamma_db,
                                              const std::vector<double> &tau_db,
                                              int di_case,
                                              const SystemConfig &cfg)
    {
        PskConstellation psk(cfg.psk_order);
        double tan_phi = std::tan(psk.half_angle);
        std::vector<double> gamma_t = ci_thresholds(cfg, gamma_db);
        std::vector<double> tau_t = di_thresholds(cfg, tau_db);

        ConstellationTable table;
        for (int k = 0; k < cfg.n_users; ++k)
            for (int l = 0; l < cfg.n_slots; ++l)
            {
                cplx v = rotated_user_point(channels.h.col(k), symbols.s(k, l), x_frame.col(l));
                double m = ci_margin(v, gamma_t[size_t(k)], tan_phi);
                table.users.push_back({k, l, v, m, m >= -1e-6});
            }
        for (int n = 0; n < cfg.n_targets; ++n)
        {
            Eigen::VectorXcd g = eve_channel(priors.targets[size_t(n)], cfg.n_tx);
            for (int l = 0; l < cfg.n_slots; ++l)
            {
                cplx u = std::conj(symbols.s(0, l)) * cplx(g.adjoint() * x_frame.col(l));
                double m = di_margin(di_case, u, tau_t[size_t(n)], tan_phi);
                table.eves.push_back({n, l, u, m, m >= -1e-6});
            }
        }
        return table;
    }

    SerResult simulate_ser(const Eigen::MatrixXcd &x_frame,
                           const CommChannelSet &channels,
                           const TargetPriorSet &priors,
                           const SymbolFrame &symbols,
                           const SystemConfig &cfg,
                           long trials, Rng &rng)
    {
        PskConstellation psk(cfg.psk_order);
        SerResult res;
        res.trials = trials;

        // intended symbol indices per (user, slot)
        Eigen::MatrixXi sent(cfg.n_users, cfg.n_slots);
        for (int k = 0; k < cfg.n_users; ++k)
            for (int l = 0; l < cfg.n_slots; ++l)
                sent(k, l) = psk.decide(symbols.s(k, l));

        // precompute noiseless observations
        Eigen::MatrixXcd user_rx = channels.h.adjoint() * x_frame; // users x slots
        Eigen::MatrixXcd eve_rx(cfg.n_targets, cfg.n_slots);
        for (int n = 0; n < cfg.n_targets; ++n)
            eve_rx.row(n) =
                (eve_channel(priors.targets[size_t(n)], cfg.n_tx).adjoint() * x_frame).row(0);

        std::vector<long> user_err(size_t(cfg.n_users), 0);
        Eigen::MatrixXd eve_err = Eigen::MatrixXd::Zero(cfg.n_targets, cfg.n_users);
        for (long t = 0; t < trials; ++t)
        {
            int l = int(t % cfg.n_slots);
            for (int k = 0; k < cfg.n_users; ++k)
            {
                cplx r = user_rx(k, l) + std::sqrt(cfg.noise_cu_mw(k)) * rng.cgaussian();
                if (psk.decide(r) != sent(k, l))
                    ++user_err[size_t(k)];
            }
            for (int n = 0; n < cfg.n_targets; ++n)
            {
                cplx r = eve_rx(n, l) + std::sqrt(cfg.noise_eve_mw(n)) * rng.cgaussian();
                int decided = psk.decide(r);
                for (int k = 0; k < cfg.n_users; ++k)
                    if (decided != sent(k, l))
                        eve_err(n, k) += 1.0;
            }
        }

        auto halfwidth = [&](double p) { return 1.96 * std::sqrt(p * (1.0 - p) / double(trials)); };
        for (int k = 0; k < cfg.n_users; ++k)
        {
            double p = double(user_err[size_t(k)]) / double(trials);
            res.user_ser.push_back(p);
            res.user_halfwidth.push_back(halfwidth(p));
        }
        res.eve_ser = eve_err / double(trials);
        // Security headline: the destructive-interference constraints defend
        // the reference stream (user 1), so the average is taken over the
        // targets' attempts on that stream. A mean over every (target, user)
        // pair is capped near (1 + (K-1)(M-1)/M)/K no matter how secure the
        // design is, because the unprotected streams cannot err worse than a
        // uniform guess; the per-pair matrix is still reported in full.
        res.eve_avg_ser = res.eve_ser.col(0).mean();
        res.eve_avg_halfwidth =
            1.96 * std::sqrt(res.eve_avg_ser * (1.0 - res.eve_avg_ser) /
                             double(trials * cfg.n_targets));
        return res;
    }

    Eigen::MatrixXd eavesdrop_sinr(const Eigen::MatrixXcd &x_frame,
                                   const TargetPriorSet &priors,
                                   const SymbolFrame &symbols,
                                   const SystemConfig &cfg)
    {
        int n_targets = int(priors.targets.size());
        Eigen::MatrixXd sinr(n_targets, cfg.n_users);
        for (int n = 0; n < n_targets; ++n)
        {
            Eigen::RowVectorXcd u =
                eve_channel(priors.targets[size_t(n)], cfg.n_tx).adjoint() * x_frame;
            double signal = u.squaredNorm() / double(cfg.n_slots);
            for (int k = 0; k < cfg.n_users; ++k)
            {
                double distortion =
                    (u - symbols.s.row(k)).squaredNorm() / double(cfg.n_slots);
                sinr(n, k) = signal / (distortion + cfg.noise_eve_mw(n));
            }
        }
        return sinr;
    }

    Eigen::VectorXd frame_snr(const Eigen::MatrixXcd &x_frame,
                              const CommChannelSet &channels,
                              const SystemConfig &cfg)
    {
        Eigen::VectorXd snr(cfg.n_users);
        for (int k = 0; k < cfg.n_users; ++k)
            snr[k] = (channels.h.col(k).adjoint() * x_frame).squaredNorm() /
                     double(cfg.n_slots) / cfg.noise_cu_mw(k);
        return snr;
    }

    std::vector<TradeoffPoint> sweep_tradeoff(const SystemConfig &cfg,
                                              const TargetPriorSet &priors,
                                              const std::vector<double> &gamma_grid_db,
                                              const std::vector<double> &power_list_dbm,
                                              const std::vector<double> &tau_db,
                                              const SweepSeeds &seeds,
                                              int n_factor_samples,
                                              const SolverOptions &opts,
                                              std::vector<Eigen::MatrixXcd> *ci_frames,
                                              std::vector<SolveReport> *ci_reports)
    {
        cfg.validate();
        CommChannelSet channels = generate_rayleigh_channels(cfg, seeds.channel);
        SymbolFrame symbols = random_symbol_frame(cfg, seeds.symbols);
        Rng factor_rng(seeds.factors);
        ExpectationFactors factors =
            expectation_factors(priors, cfg, n_factor_samples, factor_rng);

        // gamma descending within each power so every solved frame warm-starts
        // the next (easier) point; same ordering across the power axis
        std::vector<size_t> gorder(gamma_grid_db.size());
        for (size_t i = 0; i < gorder.size(); ++i)
            gorder[i] = i;
        std::sort(gorder.begin(), gorder.end(), [&](size_t a, size_t b) {
            return gamma_grid_db[a] > gamma_grid_db[b];
        });
        std::vector<size_t> porder(power_list_dbm.size());
        for (size_t i = 0; i < porder.size(); ++i)
            porder[i] = i;
        std::sort(porder.begin(), porder.end(), [&](size_t a, size_t b) {
            return power_list_dbm[a] < power_list_dbm[b];
        });

        size_t ng = gamma_grid_db.size();
        std::vector<Eigen::MatrixXcd> solved(ng * power_list_dbm.size());
        std::vector<char> has_frame(ng * power_list_dbm.size(), 0);

        std::vector<TradeoffPoint> out;
        for (size_t ppos = 0; ppos < porder.size(); ++ppos)
            for (size_t gpos = 0; gpos < gorder.size(); ++gpos)
            {
                size_t pi = porder[ppos], gi = gorder[gpos];
                TradeoffPoint pt;
                pt.gamma_db = gamma_grid_db[gi];
                pt.power_budget_dbm = power_list_dbm[pi];

                SystemConfig c = cfg;
                c.power_budget_dbm = pt.power_budget_dbm;
                std::vector<double> gamma(size_t(c.n_users), pt.gamma_db);

                SolverOptions o = opts;
                o.warm_starts.clear();
                if (gpos > 0 && has_frame[pi * ng + gorder[gpos - 1]])
                    o.warm_starts.push_back(solved[pi * ng + gorder[gpos - 1]]);
                if (ppos > 0 && has_frame[porder[ppos - 1] * ng + gi])
                    o.warm_starts.push_back(solved[porder[ppos - 1] * ng + gi]);

                SolveReport point_report;
                try
                {
                    DesignResult res =
                        sca_design(c, channels, symbols, priors, factors, gamma, tau_db, o);
                    pt.ci_feasible = true;
                    pt.bcrb_ci = res.report.final_bcrb;
                    pt.winning_case = res.report.chosen_case;
                    pt.ci_termination = res.report.termination;
                    point_report = res.report;
                    solved[pi * ng + gi] = res.x_frame;
                    has_frame[pi * ng + gi] = 1;
                }
                catch (const InfeasibleError &)
                {
                    pt.ci_termination = "infeasible";
                    point_report.termination = "infeasible";
                }

                try
                {
                    BlockLevelResult blk = block_level_design(c, channels, priors, factors,
                                                              gamma, seeds.symbols, o);
                    pt.block_feasible = true;
                    pt.bcrb_block = blk.final_bcrb;
                }
                catch (const InfeasibleError &)
                {
                }

                if (ci_reports)
                    ci_reports->push_back(std::move(point_report));
                if (ci_frames)
                    ci_frames->push_back(pt.ci_feasible ? solved[pi * ng + gi]
                                                        : Eigen::MatrixXcd());
                out.push_back(std::move(pt));
            }
        return out;
    }
}
