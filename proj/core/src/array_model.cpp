// SPDX-License-Identifier: Apache-2.0
//
// secure-isac: secure dual-functional sensing/communication frame design
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#include "isac/array_model.hpp"

#include <string>

namespace isac
{
    namespace
    {
        double resolve_noise(const std::vector<double> &v, int idx)
        {
            if (v.empty())
                return 1.0; // 0 dBm default
            return dbm_to_mw(v[size_t(idx)]);
        }
    }

    void SystemConfig::validate() const
    {
        if (n_tx < 1 || n_tx % 2 != 0)
            throw ConfigError("system.n_tx must be a positive even integer");
        if (n_rx < 1 || n_rx % 2 != 0)
            throw ConfigError("system.n_rx must be a positive even integer");
        if (n_slots < 1)
            throw ConfigError("system.n_slots must be >= 1");
        if (n_users < 1)
            throw ConfigError("system.n_users must be >= 1");
        if (n_targets < 1)
            throw ConfigError("system.n_targets must be >= 1");
        if (psk_order != 2 && psk_order != 4 && psk_order != 8 && psk_order != 16)
            throw ConfigError("system.psk_order must be one of {2, 4, 8, 16}");
        if (!noise_cu_dbm.empty() && int(noise_cu_dbm.size()) != n_users)
            throw ConfigError("system.noise_cu_dbm length must equal n_users");
        if (!noise_eve_dbm.empty() && int(noise_eve_dbm.size()) != n_targets)
            throw ConfigError("system.noise_eve_dbm length must equal n_targets");
    }

    double SystemConfig::noise_cu_mw(int k) const { return resolve_noise(noise_cu_dbm, k); }
    double SystemConfig::noise_eve_mw(int n) const { return resolve_noise(noise_eve_dbm, n); }

    PskConstellation::PskConstellation(int m) : order(m), half_angle(pi / m)
    {
        if (m != 2 && m != 4 && m != 8 && m != 16)
            throw ConfigError("psk_order must be one of {2, 4, 8, 16}");
    }

    cplx PskConstellation::point(int m) const
    {
        double ang = 2.0 * pi * m / order;
        return cplx(std::cos(ang), std::sin(ang));
    }

    int PskConstellation::decide(cplx w) const
    {
        double ang = std::arg(w);
        int m = int(std::lround(ang * order / (2.0 * pi)));
        return ((m % order) + order) % order;
    }

    Eigen::VectorXcd steering_vector(double theta, int n)
    {
        if (n < 1 || n % 2 != 0)
            throw ConfigError("steering_vector: element count must be positive and even");
        Eigen::VectorXcd a(n);
        double st = std::sin(theta);
        for (int i = 0; i < n; ++i)
        {
            double w = (i + 1) - (n + 1) / 2.0; // symmetric index weight
            double phase = pi * w * st;
            a[i] = cplx(std::cos(phase), std::sin(phase));
        }
        return a;
    }

    Eigen::VectorXcd steering_derivative(double theta, int n)
    {
        if (n < 1 || n % 2 != 0)
            throw ConfigError("steering_derivative: element count must be positive and even");
        Eigen::VectorXcd a = steering_vector(theta, n);
        double ct = std::cos(theta);
        Eigen::VectorXcd da(n);
        for (int i = 0; i < n; ++i)
        {
            double w = (i + 1) - (n + 1) / 2.0;
            da[i] = cplx(0.0, pi * w * ct) * a[i];
        }
        return da;
    }

    Eigen::MatrixXcd target_response(const Eigen::VectorXcd &alphas,
                                     const Eigen::VectorXd &thetas,
                                     const SystemConfig &cfg)
    {
        if (alphas.size() != thetas.size())
            throw ConfigError("target_response: alphas and thetas length mismatch");
        Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(cfg.n_rx, cfg.n_tx);
        for (int n = 0; n < alphas.size(); ++n)
        {
            Eigen::VectorXcd b = steering_vector(thetas[n], cfg.n_rx);
            Eigen::VectorXcd a = steering_vector(thetas[n], cfg.n_tx);
            h.noalias() += alphas[n] * b * a.adjoint();
        }
        return h;
    }

    Eigen::MatrixXcd sample_covariance(const Eigen::MatrixXcd &x_frame)
    {
        if (x_frame.size() == 0)
            throw ConfigError("sample_covariance: empty frame");
        return (x_frame * x_frame.adjoint()) / double(x_frame.cols());
    }

    Eigen::VectorXd beampattern(const Eigen::MatrixXcd &r_x, const Eigen::VectorXd &grid)
    {
        double scale = std::max(r_x.norm(), 1e-300);
        if ((r_x - r_x.adjoint()).norm() > 1e-10 * scale)
            throw ConfigError("beampattern: covariance must be Hermitian");
        Eigen::VectorXd p(grid.size());
        for (int i = 0; i < grid.size(); ++i)
        {
            Eigen::VectorXcd a = steering_vector(grid[i], int(r_x.rows()));
            double v = std::real(cplx(a.adjoint() * r_x * a));
            p[i] = v > 0.0 ? v : 0.0;
        }
        return p;
    }

    CommChannelSet generate_rayleigh_channels(const SystemConfig &cfg, std::uint64_t seed)
    {
        Rng rng(seed);
        CommChannelSet set;
        set.h.resize(cfg.n_tx, cfg.n_users);
        for (int k = 0; k < cfg.n_users; ++k)
            for (int i = 0; i < cfg.n_tx; ++i)
                set.h(i, k) = rng.cgaussian();
        return set;
    }
}
