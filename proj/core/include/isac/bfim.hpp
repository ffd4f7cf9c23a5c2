// SPDX-License-Identifier: Apache-2.0
//
// secure-isac: secure dual-functional sensing/communication frame design
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#ifndef ISAC_BFIM_HPP
#define ISAC_BFIM_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "isac/array_model.hpp"
#include "isac/priors.hpp"

namespace isac
{
    // Parameter-derivative blocks of the vectorized sensing channel at one
    // eta draw. blocks[i], i = 0..2*n_rx-1, each 3N x n_tx; the second half
    // is the complex conjugate of the first.
    struct DerivativeBlocks
    {
        std::vector<Eigen::MatrixXcd> blocks;
    };

    DerivativeBlocks derivative_blocks(const EtaSample &eta, const SystemConfig &cfg);

    // Derivatives of H_S itself with respect to each eta component, in the
    // fixed flattening order. Shared by the derivative blocks and by the
    // direct-FIM oracle used in tests.
    std::vector<Eigen::MatrixXcd> channel_derivatives(const EtaSample &eta,
                                                      const SystemConfig &cfg);

    // Cached low-rank factors of the prior expectation of the two quadratic
    // forms in the BFIM. Immutable once built; shareable across solver runs.
    struct ExpectationFactors
    {
        std::vector<Eigen::MatrixXcd> f_tilde; // rank r1 factors, 3N x n_tx
        std::vector<Eigen::MatrixXcd> g_tilde; // rank r2 factors, 3N x n_tx
        int sample_count = 0;
        int n_params = 0;
        int n_tx = 0;

        int rank1() const { return int(f_tilde.size()); }
        int rank2() const { return int(g_tilde.size()); }
    };

    // Monte-Carlo estimate of the expectation factors over n_samples prior
    // draws. Eigenvalues below eps_rank * lambda_max are truncated.
    ExpectationFactors expectation_factors(const TargetPriorSet &priors,
                                           const SystemConfig &cfg,
                                           int n_samples, Rng &rng,
                                           double eps_rank = 1e-10);

    // Versioned JSON artifact for the factor cache
    void save_factors(const std::string &path, const ExpectationFactors &factors,
                      const std::string &cache_key);
    ExpectationFactors load_factors(const std::string &path, std::string *cache_key = nullptr);

    struct BfimOptions
    {
        // Scale the prior FIM by L/sigma_s^2 together with the data term
        // instead of adding it unscaled.
        bool scale_prior_with_snr = false;
        // Optional ridge added to J when the plain factorization fails;
        // 0 disables (failures throw SingularMatrixError).
        double ridge = 0.0;
    };

    struct BfimBundle
    {
        Eigen::MatrixXd j;    // real symmetric 3N x 3N
        double bcrb = 0.0;    // tr(J^-1)
        double imag_residue = 0.0;
    };

    BfimBundle assemble_bfim(const Eigen::MatrixXcd &r_x,
                             const ExpectationFactors &factors,
                             const Eigen::MatrixXd &j_prior,
                             const SystemConfig &cfg,
                             const BfimOptions &opts = {});

    // tr(J^-1) as a function of the frame X (through R_x = X X^H / L)
    double bcrb_of_frame(const Eigen::MatrixXcd &x_frame,
                         const ExpectationFactors &factors,
                         const Eigen::MatrixXd &j_prior,
                         const SystemConfig &cfg,
                         const BfimOptions &opts = {});

    // Hermitian sensitivity A such that d tr(J^-1) = -(L/sigma_s^2) Re tr(A dR_x)
    Eigen::MatrixXcd bcrb_cov_sensitivity(const Eigen::MatrixXcd &r_x,
                                          const ExpectationFactors &factors,
                                          const Eigen::MatrixXd &j_prior,
                                          const SystemConfig &cfg,
                                          const BfimOptions &opts = {});

    // Gradient G of f(X) = tr(J(X)^-1) in the sense
    // f(X + D) = f(X) + Re tr(G^H D) + o(||D||)
    Eigen::MatrixXcd bcrb_gradient(const Eigen::MatrixXcd &x_frame,
                                   const ExpectationFactors &factors,
                                   const Eigen::MatrixXd &j_prior,
                                   const SystemConfig &cfg,
                                   const BfimOptions &opts = {});
}

#endif
