// SPDX-License-Identifier: Apache-2.0
//
// secure-isac: secure dual-functional sensing/communication frame design
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#ifndef ISAC_ARRAY_MODEL_HPP
#define ISAC_ARRAY_MODEL_HPP

#include <Eigen/Dense>
#include <vector>

#include "isac/util.hpp"

namespace isac
{
    // Static description of the dual-functional transmitter and receiver.
    // All dB/dBm quantities are converted to linear scale by the accessors;
    // internally everything runs in mW and radians.
    struct SystemConfig
    {
        int n_tx = 12;      // transmit antennas (must be even, symmetric ULA)
        int n_rx = 10;      // receive antennas (must be even)
        int n_slots = 100;  // frame length L
        int n_users = 3;    // communication users
        int n_targets = 2;  // sensing targets / potential eavesdroppers
        double power_budget_dbm = 30.0;
        std::vector<double> noise_cu_dbm;  // per user, defaults to 0 dBm
        std::vector<double> noise_eve_dbm; // per target, defaults to 0 dBm
        double noise_sensing_dbm = 0.0;
        int psk_order = 4;

        // Throws ConfigError naming the offending field.
        void validate() const;

        double power_budget_mw() const { return dbm_to_mw(power_budget_dbm); }
        double noise_cu_mw(int k) const;
        double noise_eve_mw(int n) const;
        double noise_sensing_mw() const { return dbm_to_mw(noise_sensing_dbm); }
        int n_params() const { return 3 * n_targets; }
    };

    // M-PSK alphabet e^{j 2 pi m / M}, m = 0..M-1. The constructive-region
    // geometry only depends on the half sector angle phi = pi / M.
    struct PskConstellation
    {
        int order;
        double half_angle;

        explicit PskConstellation(int m);

        cplx point(int m) const;
        // Nearest-symbol phase-sector decision
        int decide(cplx w) const;
    };

    // One MISO channel column per user, n_tx x n_users
    struct CommChannelSet
    {
        Eigen::MatrixXcd h;
    };

    // Half-wavelength ULA steering vector with the array center as phase
    // reference: element i (1-based) is exp(j pi (i - (n+1)/2) sin(theta)).
    Eigen::VectorXcd steering_vector(double theta, int n);

    // Element-wise derivative of the steering vector with respect to theta.
    // The symmetric phase reference makes a(theta)^H da(theta) vanish.
    Eigen::VectorXcd steering_derivative(double theta, int n);

    // Target response H_S = sum_n alpha_n b(theta_n) a(theta_n)^H
    Eigen::MatrixXcd target_response(const Eigen::VectorXcd &alphas,
                                     const Eigen::VectorXd &thetas,
                                     const SystemConfig &cfg);

    // R_x = X X^H / L
    Eigen::MatrixXcd sample_covariance(const Eigen::MatrixXcd &x_frame);

    // P(theta) = a(theta)^H R a(theta), clamped at zero. Throws on a
    // non-Hermitian input.
    Eigen::VectorXd beampattern(const Eigen::MatrixXcd &r_x,
                                const Eigen::VectorXd &grid);

    // i.i.d. standard complex Gaussian entries, deterministic per seed
    CommChannelSet generate_rayleigh_channels(const SystemConfig &cfg, std::uint64_t seed);
}

#endif
