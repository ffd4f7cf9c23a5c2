// SPDX-License-Identifier: Apache-2.0
//
// secure-isac: secure dual-functional sensing/communication frame design
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#include "isac/bfim.hpp"

#include <Eigen/Eigenvalues>
#include <fstream>

#include <json.hpp>

namespace isac
{
    std::vector<Eigen::MatrixXcd> channel_derivatives(const EtaSample &eta,
                                                      const SystemConfig &cfg)
    {
        int n = eta.n_targets();
        std::vector<Eigen::MatrixXcd> d(size_t(3 * n));
        for (int i = 0; i < n; ++i)
        {
            Eigen::VectorXcd a = steering_vector(eta.theta[i], cfg.n_tx);
            Eigen::VectorXcd b = steering_vector(eta.theta[i], cfg.n_rx);
            Eigen::VectorXcd da = steering_derivative(eta.theta[i], cfg.n_tx);
            Eigen::VectorXcd db = steering_derivative(eta.theta[i], cfg.n_rx);
            Eigen::MatrixXcd ba = b * a.adjoint();
            d[size_t(i)] = ba;                              // d/dRe(alpha)
            d[size_t(n + i)] = cplx(0.0, 1.0) * ba;         // d/dIm(alpha)
            d[size_t(2 * n + i)] =
                eta.alpha(i) * (db * a.adjoint() + b * da.adjoint()); // d/dtheta
        }
        return d;
    }

    DerivativeBlocks derivative_blocks(const EtaSample &eta, const SystemConfig &cfg)
    {
        int n_par = 3 * eta.n_targets();
        std::vector<Eigen::MatrixXcd> d = channel_derivatives(eta, cfg);

        DerivativeBlocks out;
        out.blocks.resize(size_t(2 * cfg.n_rx));
        // Block r holds, row p, the conjugated r-th row of dH/deta_p; the
        // second half of the blocks is the plain conjugate of the first.
        for (int r = 0; r < cfg.n_rx; ++r)
        {
            Eigen::MatrixXcd f(n_par, cfg.n_tx);
            for (int p = 0; p < n_par; ++p)
                f.row(p) = d[size_t(p)].row(r).conjugate();
            out.blocks[size_t(cfg.n_rx + r)] = f.conjugate();
            out.blocks[size_t(r)] = std::move(f);
        }
        return out;
    }

    namespace
    {
        Eigen::VectorXcd flatten(const Eigen::MatrixXcd &m)
        {
            return Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size());
        }

        std::vector<Eigen::MatrixXcd> factorize(const Eigen::MatrixXcd &b_bar,
                                                int n_par, int n_tx, double eps_rank)
        {
            Eigen::MatrixXcd herm = 0.5 * (b_bar + b_bar.adjoint());
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(herm);
            double lam_max = eig.eigenvalues().maxCoeff();
            std::vector<Eigen::MatrixXcd> factors;
            // eigenvalues ascending; keep significant ones, largest first
            for (int i = int(eig.eigenvalues().size()) - 1; i >= 0; --i)
            {
                double lam = eig.eigenvalues()[i];
                if (lam <= eps_rank * lam_max || lam <= 0.0)
                    break;
                Eigen::VectorXcd u = std::sqrt(lam) * eig.eigenvectors().col(i);
                factors.push_back(Eigen::Map<const Eigen::MatrixXcd>(u.data(), n_par, n_tx));
            }
            return factors;
        }
    }

    ExpectationFactors expectation_factors(const TargetPriorSet &priors,
                                           const SystemConfig &cfg,
                                           int n_samples, Rng &rng,
                                           double eps_rank)
    {
        if (n_samples < 1)
            throw ConfigError("expectation_factors: n_samples must be >= 1");
        int n_par = 3 * priors.n_targets();
        int dim = n_par * cfg.n_tx;
        Eigen::MatrixXcd b1 = Eigen::MatrixXcd::Zero(dim, dim);
        Eigen::MatrixXcd b2 = Eigen::MatrixXcd::Zero(dim, dim);
        for (int s = 0; s < n_samples; ++s)
        {
            EtaSample eta = sample_eta(priors, rng);
            DerivativeBlocks blocks = derivative_blocks(eta, cfg);
            for (int i = 0; i < cfg.n_rx; ++i)
            {
                Eigen::VectorXcd v1 = flatten(blocks.blocks[size_t(i)]);
                Eigen::VectorXcd v2 = flatten(blocks.blocks[size_t(cfg.n_rx + i)]);
                b1.noalias() += v1 * v1.adjoint();
                b2.noalias() += v2 * v2.adjoint();
            }
        }
        b1 /= double(n_samples);
        b2 /= double(n_samples);

        ExpectationFactors out;
        out.f_tilde = factorize(b1, n_par, cfg.n_tx, eps_rank);
        out.g_tilde = factorize(b2, n_par, cfg.n_tx, eps_rank);
        out.sample_count = n_samples;
        out.n_params = n_par;
        out.n_tx = cfg.n_tx;
        return out;
    }

    namespace
    {
        // Sum_i F_i M F_i^H for the two factor families
        Eigen::MatrixXcd data_term(const Eigen::MatrixXcd &r_x,
                                   const ExpectationFactors &factors)
        {
            int p = factors.n_params;
            Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(p, p);
            Eigen::MatrixXcd rt = r_x.transpose();
            for (const auto &f : factors.f_tilde)
                acc.noalias() += f * rt * f.adjoint();
            for (const auto &g : factors.g_tilde)
                acc.noalias() += g * r_x * g.adjoint();
            return acc;
        }

        Eigen::LLT<Eigen::MatrixXd> factor_j(const Eigen::MatrixXd &j,
                                             const BfimOptions &opts,
                                             Eigen::MatrixXd *j_used)
        {
            Eigen::LLT<Eigen::MatrixXd> llt(j);
            if (llt.info() == Eigen::Success)
            {
                *j_used = j;
                return llt;
            }
            if (opts.ridge > 0.0)
            {
                Eigen::MatrixXd jr = j + opts.ridge * Eigen::MatrixXd::Identity(j.rows(), j.cols());
                Eigen::LLT<Eigen::MatrixXd> llt2(jr);
                if (llt2.info() == Eigen::Success)
                {
                    *j_used = jr;
                    return llt2;
                }
            }
            throw SingularMatrixError("assemble_bfim: BFIM is singular (zero covariance with a degenerate prior?)");
        }
    }

    BfimBundle assemble_bfim(const Eigen::MatrixXcd &r_x,
                             const ExpectationFactors &factors,
                             const Eigen::MatrixXd &j_prior,
                             const SystemConfig &cfg,
                             const BfimOptions &opts)
    {
        double snr_scale = cfg.n_slots / cfg.noise_sensing_mw();
        Eigen::MatrixXcd jc = snr_scale * data_term(r_x, factors);
        if (opts.scale_prior_with_snr)
            jc += snr_scale * j_prior;
        else
            jc += j_prior;

        Eigen::MatrixXcd herm = 0.5 * (jc + jc.adjoint());
        BfimBundle out;
        out.imag_residue = herm.imag().norm() / std::max(herm.norm(), 1e-300);
        Eigen::MatrixXd j = herm.real();
        j = 0.5 * (j + j.transpose()).eval();

        Eigen::MatrixXd j_used;
        Eigen::LLT<Eigen::MatrixXd> llt = factor_j(j, opts, &j_used);
        Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(j.rows(), j.cols()));
        out.j = j_used;
        out.bcrb = inv.trace();
        return out;
    }

    double bcrb_of_frame(const Eigen::MatrixXcd &x_frame,
                         const ExpectationFactors &factors,
                         const Eigen::MatrixXd &j_prior,
                         const SystemConfig &cfg,
                         const BfimOptions &opts)
    {
        return assemble_bfim(sample_covariance(x_frame), factors, j_prior, cfg, opts).bcrb;
    }

    Eigen::MatrixXcd bcrb_cov_sensitivity(const Eigen::MatrixXcd &r_x,
                                          const ExpectationFactors &factors,
                                          const Eigen::MatrixXd &j_prior,
                                          const SystemConfig &cfg,
                                          const BfimOptions &opts)
    {
        BfimBundle bundle = assemble_bfim(r_x, factors, j_prior, cfg, opts);
        Eigen::LLT<Eigen::MatrixXd> llt(bundle.j);
        Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(bundle.j.rows(), bundle.j.cols()));
        Eigen::MatrixXcd k2 = (inv * inv).cast<cplx>();

        // d tr(J^-1) = -tr(J^-2 dJ); transposed F-part because that family
        // multiplies R_x^T
        int nt = factors.n_tx;
        Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(nt, nt);
        for (const auto &f : factors.f_tilde)
            a.noalias() += (f.adjoint() * k2 * f).transpose();
        for (const auto &g : factors.g_tilde)
            a.noalias() += g.adjoint() * k2 * g;
        return a;
    }

    Eigen::MatrixXcd bcrb_gradient(const Eigen::MatrixXcd &x_frame,
                                   const ExpectationFactors &factors,
                                   const Eigen::MatrixXd &j_prior,
                                   const SystemConfig &cfg,
                                   const BfimOptions &opts)
    {
        Eigen::MatrixXcd a = bcrb_cov_sensitivity(sample_covariance(x_frame),
                                                  factors, j_prior, cfg, opts);
        // chain rule through R_x = X X^H / L; the L cancels against the
        // L/sigma_s^2 prefactor of J
        return (-2.0 / cfg.noise_sensing_mw()) * (a * x_frame);
    }

    namespace
    {
        nlohmann::json matrix_to_json(const Eigen::MatrixXcd &m)
        {
            nlohmann::json arr = nlohmann::json::array();
            for (int c = 0; c < m.cols(); ++c)
                for (int r = 0; r < m.rows(); ++r)
                {
                    arr.push_back(m(r, c).real());
                    arr.push_back(m(r, c).imag());
                }
            return arr;
        }

        Eigen::MatrixXcd matrix_from_json(const nlohmann::json &arr, int rows, int cols)
        {
            Eigen::MatrixXcd m(rows, cols);
            size_t k = 0;
            for (int c = 0; c < cols; ++c)
                for (int r = 0; r < rows; ++r)
                {
                    double re = arr.at(k++).get<double>();
                    double im = arr.at(k++).get<double>();
                    m(r, c) = cplx(re, im);
                }
            return m;
        }
    }

    void save_factors(const std::string &path, const ExpectationFactors &factors,
                      const std::string &cache_key)
    {
        nlohmann::json doc;
        doc["format"] = "secure-isac-factors";
        doc["version"] = 1;
        doc["cache_key"] = cache_key;
        doc["n_params"] = factors.n_params;
        doc["n_tx"] = factors.n_tx;
        doc["sample_count"] = factors.sample_count;
        doc["f_tilde"] = nlohmann::json::array();
        doc["g_tilde"] = nlohmann::json::array();
        for (const auto &f : factors.f_tilde)
            doc["f_tilde"].push_back(matrix_to_json(f));
        for (const auto &g : factors.g_tilde)
            doc["g_tilde"].push_back(matrix_to_json(g));
        std::ofstream out(path);
        if (!out)
            throw ConfigError("save_factors: cannot open " + path);
        out << doc.dump() << "\n";
    }

    ExpectationFactors load_factors(const std::string &path, std::string *cache_key)
    {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("load_factors: cannot open " + path);
        nlohmann::json doc = nlohmann::json::parse(in);
        if (doc.value("format", "") != "secure-isac-factors" || doc.value("version", 0) != 1)
            throw ConfigError("load_factors: unrecognized factor artifact version");
        ExpectationFactors out;
        out.n_params = doc.at("n_params").get<int>();
        out.n_tx = doc.at("n_tx").get<int>();
        out.sample_count = doc.at("sample_count").get<int>();
        for (const auto &f : doc.at("f_tilde"))
            out.f_tilde.push_back(matrix_from_json(f, out.n_params, out.n_tx));
        for (const auto &g : doc.at("g_tilde"))
            out.g_tilde.push_back(matrix_from_json(g, out.n_params, out.n_tx));
        if (cache_key)
            *cache_key = doc.value("cache_key", "");
        return out;
    }
}
