// SPDX-License-Identifier: Apache-2.0
//
// secure-isac: secure dual-functional sensing/communication frame design
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#ifndef ISAC_PRIORS_HPP
#define ISAC_PRIORS_HPP

#include <Eigen/Dense>
#include <vector>

#include "isac/util.hpp"

namespace isac
{
    struct TargetPrior
    {
        double mu = 0.0;          // von Mises mean direction [rad]
        double sigma_theta = 0.1; // angle std-dev [rad]; kappa = 1/sigma^2
        double beta = 1.0;        // deterministic Eve path loss

        double kappa() const { return 1.0 / (sigma_theta * sigma_theta); }
    };

    struct TargetPriorSet
    {
        double sigma0_sq = 1.0; // variance of the complex amplitude alpha_n
        // When set, sigma0_sq is read as the per-component variance instead
        // of the variance of the complex alpha.
        bool per_component_variance = false;
        std::vector<TargetPrior> targets;

        int n_targets() const { return int(targets.size()); }
        double component_variance() const
        {
            return per_component_variance ? sigma0_sq : sigma0_sq / 2.0;
        }
        void validate() const;
    };

    // One draw of the unknown parameter vector eta. Flattening order is
    // fixed as [Re alpha(1..N); Im alpha(1..N); theta(1..N)].
    struct EtaSample
    {
        Eigen::VectorXd re_alpha;
        Eigen::VectorXd im_alpha;
        Eigen::VectorXd theta;

        int n_targets() const { return int(theta.size()); }
        cplx alpha(int n) const { return cplx(re_alpha[n], im_alpha[n]); }
    };

    // One draw from the density exp(kappa cos(x - mu)) / (2 pi I0(kappa)),
    // wrapped to (-pi, pi]. Best-Fisher rejection sampling.
    double sample_von_mises(double mu, double kappa, Rng &rng);

    EtaSample sample_eta(const TargetPriorSet &priors, Rng &rng);

    // Prior FIM, block-diagonal over the fixed eta ordering:
    // diag(1/(2 sigma0^2) I_N, 1/(2 sigma0^2) I_N, diag(kappa_n))
    Eigen::MatrixXd prior_fim(const TargetPriorSet &priors);
}

#endif
