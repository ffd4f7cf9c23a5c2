// SPDX-License-Identifier: Apache-2.0
//
// secure-isac: secure dual-functional sensing/communication frame design
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#include "isac/experiment.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace isac
{
    using json = nlohmann::json;
    namespace fs = std::filesystem;

    namespace
    {
        constexpr const char *k_config_schema = "secure-isac-config";
        constexpr const char *k_manifest_name = "run_manifest.json";
        constexpr const char *k_version = "0.1.0";

        void reject_unknown(const json &obj, const char *where,
                            std::initializer_list<const char *> allowed)
        {
            for (auto it = obj.begin(); it != obj.end(); ++it)
            {
                bool ok = false;
                for (const char *key : allowed)
                    if (it.key() == key)
                    {
                        ok = true;
                        break;
                    }
                if (!ok)
                    throw ConfigError(std::string(where) + ": unknown key '" + it.key() + "'");
            }
        }

        template <typename T>
        T require(const json &obj, const char *where, const char *key)
        {
            if (!obj.contains(key))
                throw ConfigError(std::string(where) + ": missing key '" + key + "'");
            try
            {
                return obj.at(key).get<T>();
            }
            catch (const json::exception &)
            {
                throw ConfigError(std::string(where) + ": bad value for '" + key + "'");
            }
        }

        template <typename T>
        T optional_of(const json &obj, const char *where, const char *key, T fallback)
        {
            if (!obj.contains(key))
                return fallback;
            return require<T>(obj, where, key);
        }
    }

    SolverOptions ExperimentConfig::solver_options() const
    {
        SolverOptions o;
        o.epsilon = solver_epsilon;
        o.max_outer = solver_max_outer;
        o.bfim.scale_prior_with_snr = scale_prior_with_snr;
        o.bfim.ridge = ridge;
        return o;
    }

    ExperimentConfig parse_config(const std::string &json_text)
    {
        json doc;
        try
        {
            doc = json::parse(json_text);
        }
        catch (const json::exception &e)
        {
            throw ConfigError(std::string("config: invalid JSON: ") + e.what());
        }
        if (!doc.is_object())
            throw ConfigError("config: top level must be an object");
        reject_unknown(doc, "config",
                       {"schema", "version", "system", "priors", "gamma_db", "tau_db",
                        "solver", "seeds", "sweep", "ser_trials", "output_dir"});
        if (require<std::string>(doc, "config", "schema") != k_config_schema)
            throw ConfigError("config: schema must be 'secure-isac-config'");
        if (require<int>(doc, "config", "version") != 1)
            throw ConfigError("config: unsupported version (expected 1)");

        ExperimentConfig cfg;

        const json &sys = require<json>(doc, "config", "system");
        reject_unknown(sys, "system",
                       {"n_tx", "n_rx", "n_slots", "n_users", "n_targets",
                        "power_budget_dbm", "noise_cu_dbm", "noise_eve_dbm",
                        "noise_sensing_dbm", "psk_order"});
        cfg.system.n_tx = require<int>(sys, "system", "n_tx");
        cfg.system.n_rx = require<int>(sys, "system", "n_rx");
        cfg.system.n_slots = require<int>(sys, "system", "n_slots");
        cfg.system.n_users = require<int>(sys, "system", "n_users");
        cfg.system.n_targets = require<int>(sys, "system", "n_targets");
        cfg.system.power_budget_dbm = require<double>(sys, "system", "power_budget_dbm");
        cfg.system.noise_cu_dbm =
            optional_of<std::vector<double>>(sys, "system", "noise_cu_dbm", {});
        cfg.system.noise_eve_dbm =
            optional_of<std::vector<double>>(sys, "system", "noise_eve_dbm", {});
        cfg.system.noise_sensing_dbm = optional_of<double>(sys, "system", "noise_sensing_dbm", 0.0);
        cfg.system.psk_order = require<int>(sys, "system", "psk_order");

        const json &pri = require<json>(doc, "config", "priors");
        reject_unknown(pri, "priors", {"sigma0_sq", "per_component_variance", "targets"});
        cfg.priors.sigma0_sq = optional_of<double>(pri, "priors", "sigma0_sq", 1.0);
        cfg.priors.per_component_variance =
            optional_of<bool>(pri, "priors", "per_component_variance", false);
        const json &targets = require<json>(pri, "priors", "targets");
        if (!targets.is_array())
            throw ConfigError("priors.targets: must be an array");
        for (const auto &t : targets)
        {
            reject_unknown(t, "priors.targets[]", {"mu_deg", "sigma_theta_deg", "beta"});
            TargetPrior tp;
            tp.mu = deg_to_rad(require<double>(t, "priors.targets[]", "mu_deg"));
            tp.sigma_theta =
                deg_to_rad(require<double>(t, "priors.targets[]", "sigma_theta_deg"));
            tp.beta = optional_of<double>(t, "priors.targets[]", "beta", 1.0);
            cfg.priors.targets.push_back(tp);
        }

        cfg.gamma_db = require<std::vector<double>>(doc, "config", "gamma_db");
        cfg.tau_db = require<std::vector<double>>(doc, "config", "tau_db");

        if (doc.contains("solver"))
        {
            const json &sol = doc.at("solver");
            reject_unknown(sol, "solver",
                           {"epsilon", "max_outer", "factor_samples",
                            "scale_prior_with_snr", "ridge"});
            cfg.solver_epsilon = optional_of<double>(sol, "solver", "epsilon", cfg.solver_epsilon);
            cfg.solver_max_outer =
                optional_of<int>(sol, "solver", "max_outer", cfg.solver_max_outer);
            cfg.factor_samples =
                optional_of<int>(sol, "solver", "factor_samples", cfg.factor_samples);
            cfg.scale_prior_with_snr = optional_of<bool>(sol, "solver", "scale_prior_with_snr",
                                                         cfg.scale_prior_with_snr);
            cfg.ridge = optional_of<double>(sol, "solver", "ridge", cfg.ridge);
        }
        if (doc.contains("seeds"))
        {
            const json &sd = doc.at("seeds");
            reject_unknown(sd, "seeds", {"channel", "factors", "symbols", "noise"});
            cfg.seeds.channel = optional_of<std::uint64_t>(sd, "seeds", "channel", cfg.seeds.channel);
            cfg.seeds.factors = optional_of<std::uint64_t>(sd, "seeds", "factors", cfg.seeds.factors);
            cfg.seeds.symbols = optional_of<std::uint64_t>(sd, "seeds", "symbols", cfg.seeds.symbols);
            cfg.seeds.noise = optional_of<std::uint64_t>(sd, "seeds", "noise", cfg.seeds.noise);
        }
        if (doc.contains("sweep"))
        {
            const json &sw = doc.at("sweep");
            reject_unknown(sw, "sweep", {"gamma_grid_db", "power_list_dbm"});
            cfg.sweep_gamma_grid_db =
                require<std::vector<double>>(sw, "sweep", "gamma_grid_db");
            cfg.sweep_power_list_dbm =
                require<std::vector<double>>(sw, "sweep", "power_list_dbm");
        }
        cfg.ser_trials = optional_of<long>(doc, "config", "ser_trials", cfg.ser_trials);
        cfg.output_dir = optional_of<std::string>(doc, "config", "output_dir", cfg.output_dir);

        cfg.system.validate();
        cfg.priors.validate();
        if (int(cfg.priors.targets.size()) != cfg.system.n_targets)
            throw ConfigError("priors.targets: length must equal system.n_targets");
        if (int(cfg.gamma_db.size()) != cfg.system.n_users)
            throw ConfigError("gamma_db: length must equal system.n_users");
        if (int(cfg.tau_db.size()) != cfg.system.n_targets)
            throw ConfigError("tau_db: length must equal system.n_targets");
        if (cfg.solver_epsilon <= 0.0)
            throw ConfigError("solver.epsilon: must be positive");
        if (cfg.solver_max_outer < 1)
            throw ConfigError("solver.max_outer: must be >= 1");
        if (cfg.factor_samples < 1)
            throw ConfigError("solver.factor_samples: must be >= 1");
        if (cfg.ser_trials < 1)
            throw ConfigError("ser_trials: must be >= 1");
        return cfg;
    }

    ExperimentConfig load_config(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("config: cannot open '" + path + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse_config(buf.str());
    }

    namespace
    {
        json canonical_json(const ExperimentConfig &cfg)
        {
            json doc;
            doc["schema"] = k_config_schema;
            doc["version"] = 1;
            json sys;
            sys["n_tx"] = cfg.system.n_tx;
            sys["n_rx"] = cfg.system.n_rx;
            sys["n_slots"] = cfg.system.n_slots;
            sys["n_users"] = cfg.system.n_users;
            sys["n_targets"] = cfg.system.n_targets;
            sys["power_budget_dbm"] = cfg.system.power_budget_dbm;
            sys["noise_cu_dbm"] = cfg.system.noise_cu_dbm;
            sys["noise_eve_dbm"] = cfg.system.noise_eve_dbm;
            sys["noise_sensing_dbm"] = cfg.system.noise_sensing_dbm;
            sys["psk_order"] = cfg.system.psk_order;
            doc["system"] = sys;
            json pri;
            pri["sigma0_sq"] = cfg.priors.sigma0_sq;
            pri["per_component_variance"] = cfg.priors.per_component_variance;
            pri["targets"] = json::array();
            for (const auto &t : cfg.priors.targets)
                pri["targets"].push_back({{"mu_rad", t.mu},
                                          {"sigma_theta_rad", t.sigma_theta},
                                          {"beta", t.beta}});
            doc["priors"] = pri;
            doc["gamma_db"] = cfg.gamma_db;
            doc["tau_db"] = cfg.tau_db;
            doc["solver"] = {{"epsilon", cfg.solver_epsilon},
                             {"max_outer", cfg.solver_max_outer},
                             {"factor_samples", cfg.factor_samples},
                             {"scale_prior_with_snr", cfg.scale_prior_with_snr},
                             {"ridge", cfg.ridge}};
            doc["seeds"] = {{"channel", cfg.seeds.channel},
                            {"factors", cfg.seeds.factors},
                            {"symbols", cfg.seeds.symbols},
                            {"noise", cfg.seeds.noise}};
            doc["sweep"] = {{"gamma_grid_db", cfg.sweep_gamma_grid_db},
                            {"power_list_dbm", cfg.sweep_power_list_dbm}};
            doc["ser_trials"] = cfg.ser_trials;
            return doc;
        }
    }

    std::string config_hash(const ExperimentConfig &cfg)
    {
        char buf[20];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      (unsigned long long)fnv1a64(canonical_json(cfg).dump()));
        return std::string(buf);
    }

    namespace
    {
        struct Emitter
        {
            const ExperimentConfig &cfg;
            std::string out_dir;
            std::string command;
            std::vector<std::string> files;

            Emitter(const ExperimentConfig &c, const std::string &dir, std::string cmd)
                : cfg(c), out_dir(dir), command(std::move(cmd))
            {
                fs::create_directories(out_dir);
            }

            std::ofstream open_csv(const std::string &name, const std::string &header)
            {
                std::ofstream f(fs::path(out_dir) / name, std::ios::binary);
                f << "# manifest: " << k_manifest_name << "\n" << header << "\n";
                files.push_back(name);
                return f;
            }

            void write_json(const std::string &name, const json &doc)
            {
                std::ofstream f(fs::path(out_dir) / name, std::ios::binary);
                f << doc.dump(2) << "\n";
                files.push_back(name);
            }

            // manifest is written last, to a temp file first so a crash
            // cannot leave a half-written one behind
            void finish()
            {
                json doc;
                doc["schema"] = "secure-isac-manifest";
                doc["version"] = 1;
                doc["tool_version"] = k_version;
                doc["command"] = command;
                doc["config_hash"] = config_hash(cfg);
                doc["seeds"] = {{"channel", cfg.seeds.channel},
                                {"factors", cfg.seeds.factors},
                                {"symbols", cfg.seeds.symbols},
                                {"noise", cfg.seeds.noise}};
                doc["outputs"] = files;
                doc["wall_clock_unix_ms"] =
                    std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::system_clock::now().time_since_epoch())
                        .count();
                fs::path final_path = fs::path(out_dir) / k_manifest_name;
                fs::path tmp = final_path;
                tmp += ".tmp";
                {
                    std::ofstream f(tmp, std::ios::binary);
                    f << doc.dump(2) << "\n";
                }
                fs::rename(tmp, final_path);
                files.push_back(k_manifest_name);
            }
        };

        struct DesignArtifacts
        {
            CommChannelSet channels;
            SymbolFrame symbols;
            ExpectationFactors factors;
            DesignResult result;
        };

        DesignArtifacts run_design_core(const ExperimentConfig &cfg, int workers = 1)
        {
            DesignArtifacts art;
            art.channels = generate_rayleigh_channels(cfg.system, cfg.seeds.channel);
            art.symbols = random_symbol_frame(cfg.system, cfg.seeds.symbols);
            Rng rng(cfg.seeds.factors);
            art.factors = expectation_factors(cfg.priors, cfg.system, cfg.factor_samples, rng);
            SolverOptions opts = cfg.solver_options();
            opts.workers = workers;
            art.result = sca_design(cfg.system, art.channels, art.symbols, cfg.priors,
                                    art.factors, cfg.gamma_db, cfg.tau_db, opts);
            return art;
        }

        json report_json(const SolveReport &rep)
        {
            json cases = json::array();
            for (const auto &c : rep.cases)
            {
                json trace = json::array();
                for (double v : c.objective_trace)
                    trace.push_back(fmt_sig(v));
                cases.push_back({{"di_case", c.di_case},
                                 {"feasible", c.feasible},
                                 {"iterations", c.iterations},
                                 {"termination", c.termination},
                                 {"final_bcrb", fmt_sig(c.final_bcrb)},
                                 {"objective_trace", trace}});
            }
            return json{{"schema", "secure-isac-report"},
                        {"version", 1},
                        {"chosen_case", rep.chosen_case},
                        {"final_bcrb", fmt_sig(rep.final_bcrb)},
                        {"termination", rep.termination},
                        {"cases", cases}};
        }

        void write_frame_csv(Emitter &em, const std::string &name, const Eigen::MatrixXcd &x)
        {
            std::ofstream f = em.open_csv(name, "slot,antenna,re,im");
            for (int l = 0; l < x.cols(); ++l)
                for (int i = 0; i < x.rows(); ++i)
                    f << l << ',' << i << ',' << fmt_sig(x(i, l).real()) << ','
                      << fmt_sig(x(i, l).imag()) << "\n";
        }

        void write_constellation_csv(Emitter &em, const ConstellationTable &table)
        {
            std::ofstream f =
                em.open_csv("constellation.csv", "side,entity,slot,re,im,margin,in_region");
            auto rows = [&](const char *side, const std::vector<ConstellationPoint> &pts) {
                for (const auto &p : pts)
                    f << side << ',' << p.entity << ',' << p.slot << ','
                      << fmt_sig(p.value.real()) << ',' << fmt_sig(p.value.imag()) << ','
                      << fmt_sig(p.margin) << ',' << (p.in_region ? 1 : 0) << "\n";
            };
            rows("user", table.users);
            rows("eve", table.eves);
        }

        CommandOutcome guarded(const std::function<void()> &body)
        {
            CommandOutcome out;
            try
            {
                body();
            }
            catch (const ConfigError &e)
            {
                out.exit_code = exit_config_error;
                out.message = e.what();
            }
            catch (const InfeasibleError &e)
            {
                out.exit_code = exit_infeasible;
                out.message = e.what();
            }
            catch (const std::exception &e)
            {
                out.exit_code = exit_numerical;
                out.message = e.what();
            }
            return out;
        }
    }

    CommandOutcome run_design(const ExperimentConfig &cfg, const std::string &out_dir)
    {
        std::vector<std::string> files;
        CommandOutcome out = guarded([&] {
            DesignArtifacts art = run_design_core(cfg);
            Emitter em(cfg, out_dir, "design");
            write_frame_csv(em, "x_frame.csv", art.result.x_frame);
            em.write_json("solve_report.json", report_json(art.result.report));
            ConstellationTable table = received_constellation(
                art.result.x_frame, art.channels, cfg.priors, art.symbols, cfg.gamma_db,
                cfg.tau_db, art.result.report.chosen_case, cfg.system);
            write_constellation_csv(em, table);
            em.finish();
            files = em.files;
        });
        out.files = files;
        if (out.exit_code == exit_ok)
            out.message = "design complete";
        return out;
    }

    CommandOutcome run_beampattern(const ExperimentConfig &cfg, const std::string &out_dir)
    {
        std::vector<std::string> files;
        CommandOutcome out = guarded([&] {
            DesignArtifacts art = run_design_core(cfg);
            Eigen::MatrixXcd r = sample_covariance(art.result.x_frame);
            int rows = 1801;
            Eigen::VectorXd grid(rows);
            for (int i = 0; i < rows; ++i)
                grid[i] = deg_to_rad(-90.0 + 0.1 * i);
            Eigen::VectorXd p = beampattern(r, grid);
            double peak = p.maxCoeff();
            Emitter em(cfg, out_dir, "beampattern");
            std::ofstream f = em.open_csv("beampattern.csv", "theta_deg,p_db");
            for (int i = 0; i < rows; ++i)
                f << fmt_sig(-90.0 + 0.1 * i) << ','
                  << fmt_sig(linear_to_db(p[i] / peak)) << "\n";
            f.close();
            em.finish();
            files = em.files;
        });
        out.files = files;
        if (out.exit_code == exit_ok)
            out.message = "beampattern complete";
        return out;
    }

    CommandOutcome run_sweep(const ExperimentConfig &cfg, const std::string &out_dir, int workers)
    {
        std::vector<std::string> files;
        CommandOutcome out = guarded([&] {
            if (cfg.sweep_gamma_grid_db.empty() || cfg.sweep_power_list_dbm.empty())
                throw ConfigError("sweep: config must provide sweep.gamma_grid_db "
                                  "and sweep.power_list_dbm");
            SweepSeeds seeds{cfg.seeds.channel, cfg.seeds.factors, cfg.seeds.symbols};
            SolverOptions opts = cfg.solver_options();
            opts.workers = workers;
            std::vector<TradeoffPoint> pts =
                sweep_tradeoff(cfg.system, cfg.priors, cfg.sweep_gamma_grid_db,
                               cfg.sweep_power_list_dbm, cfg.tau_db, seeds,
                               cfg.factor_samples, opts);
            Emitter em(cfg, out_dir, "sweep");
            std::ofstream f = em.open_csv(
                "sweep.csv", "gamma_db,power_budget_dbm,bcrb_ci,bcrb_block,"
                             "ci_feasible,block_feasible,winning_case,ci_termination");
            for (const auto &p : pts)
                f << fmt_sig(p.gamma_db) << ',' << fmt_sig(p.power_budget_dbm) << ','
                  << (p.ci_feasible ? fmt_sig(p.bcrb_ci) : std::string("nan")) << ','
                  << (p.block_feasible ? fmt_sig(p.bcrb_block) : std::string("nan")) << ','
                  << (p.ci_feasible ? 1 : 0) << ',' << (p.block_feasible ? 1 : 0) << ','
                  << p.winning_case << ',' << p.ci_termination << "\n";
            f.close();
            em.finish();
            files = em.files;
        });
        out.files = files;
        if (out.exit_code == exit_ok)
            out.message = "sweep complete";
        return out;
    }

    CommandOutcome run_ser(const ExperimentConfig &cfg, const std::string &out_dir)
    {
        std::vector<std::string> files;
        CommandOutcome out = guarded([&] {
            DesignArtifacts art = run_design_core(cfg);
            Rng noise_rng(cfg.seeds.noise);
            SerResult ser = simulate_ser(art.result.x_frame, art.channels, cfg.priors,
                                         art.symbols, cfg.system, cfg.ser_trials, noise_rng);
            Emitter em(cfg, out_dir, "ser");
            std::ofstream f =
                em.open_csv("ser.csv", "side,entity,stream,ser,ci95_halfwidth,trials");
            for (int k = 0; k < cfg.system.n_users; ++k)
                f << "user," << k << ',' << k << ',' << fmt_sig(ser.user_ser[size_t(k)])
                  << ',' << fmt_sig(ser.user_halfwidth[size_t(k)]) << ',' << ser.trials
                  << "\n";
            for (int n = 0; n < cfg.system.n_targets; ++n)
                for (int k = 0; k < cfg.system.n_users; ++k)
                {
                    double p = ser.eve_ser(n, k);
                    f << "eve," << n << ',' << k << ',' << fmt_sig(p) << ','
                      << fmt_sig(1.96 * std::sqrt(p * (1.0 - p) / double(ser.trials)))
                      << ',' << ser.trials << "\n";
                }
            f << "eve_avg,-1,0," << fmt_sig(ser.eve_avg_ser) << ','
              << fmt_sig(ser.eve_avg_halfwidth) << ',' << ser.trials << "\n";
            f.close();
            em.finish();
            files = em.files;
        });
        out.files = files;
        if (out.exit_code == exit_ok)
            out.message = "ser complete";
        return out;
    }

    CommandOutcome run_factors(const ExperimentConfig &cfg, const std::string &out_dir)
    {
        std::vector<std::string> files;
        CommandOutcome out = guarded([&] {
            Rng rng(cfg.seeds.factors);
            ExpectationFactors factors =
                expectation_factors(cfg.priors, cfg.system, cfg.factor_samples, rng);
            Emitter em(cfg, out_dir, "factors");
            save_factors((fs::path(out_dir) / "factors.json").string(), factors,
                         config_hash(cfg));
            em.files.push_back("factors.json");
            em.finish();
            files = em.files;
        });
        out.files = files;
        if (out.exit_code == exit_ok)
            out.message = "factors complete";
        return out;
    }
}
