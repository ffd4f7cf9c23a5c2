// SPDX-License-Identifier: Apache-2.0
//
// secure-isac: secure dual-functional sensing/communication frame design
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#include "isac/priors.hpp"

namespace isac
{
    void TargetPriorSet::validate() const
    {
        if (sigma0_sq <= 0.0)
            throw ConfigError("priors.sigma0_sq must be > 0");
        if (targets.empty())
            throw ConfigError("priors.targets must be non-empty");
        for (const auto &t : targets)
        {
            if (t.sigma_theta <= 0.0)
                throw ConfigError("priors.targets[].sigma_theta must be > 0");
            if (t.beta <= 0.0)
                throw ConfigError("priors.targets[].beta must be > 0");
        }
    }

    double sample_von_mises(double mu, double kappa, Rng &rng)
    {
        if (kappa < 0.0)
            throw ConfigError("sample_von_mises: kappa must be >= 0");
        if (kappa < 1e-10)
            return wrap_angle(mu + 2.0 * pi * (rng.uniform() - 0.5));

        // Best-Fisher (1979) wrapped-Cauchy envelope rejection
        double a = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
        double b = (a - std::sqrt(2.0 * a)) / (2.0 * kappa);
        double r = (1.0 + b * b) / (2.0 * b);

        for (;;)
        {
            double u1 = rng.uniform();
            double z = std::cos(pi * u1);
            double f = (1.0 + r * z) / (r + z);
            double c = kappa * (r - f);
            double u2 = rng.uniform();
            if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0)
            {
                double u3 = rng.uniform();
                double sign = u3 < 0.5 ? -1.0 : 1.0;
                return wrap_angle(mu + sign * std::acos(f));
            }
        }
    }

    EtaSample sample_eta(const TargetPriorSet &priors, Rng &rng)
    {
        priors.validate();
        int n = priors.n_targets();
        double comp_sd = std::sqrt(priors.component_variance());
        EtaSample eta;
        eta.re_alpha.resize(n);
        eta.im_alpha.resize(n);
        eta.theta.resize(n);
        for (int i = 0; i < n; ++i)
        {
            eta.re_alpha[i] = comp_sd * rng.gaussian();
            eta.im_alpha[i] = comp_sd * rng.gaussian();
            eta.theta[i] = sample_von_mises(priors.targets[size_t(i)].mu,
                                           priors.targets[size_t(i)].kappa(), rng);
        }
        return eta;
    }

    Eigen::MatrixXd prior_fim(const TargetPriorSet &priors)
    {
        priors.validate();
        int n = priors.n_targets();
        Eigen::MatrixXd j = Eigen::MatrixXd::Zero(3 * n, 3 * n);
        double amp = 1.0 / (2.0 * priors.sigma0_sq);
        for (int i = 0; i < n; ++i)
        {
            j(i, i) = amp;
            j(n + i, n + i) = amp;
            j(2 * n + i, 2 * n + i) = priors.targets[size_t(i)].kappa();
        }
        return j;
    }
}
