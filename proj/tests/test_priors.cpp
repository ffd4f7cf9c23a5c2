// SPDX-License-Identifier: Apache-2.0
//
// secure-isac: secure dual-functional sensing/communication frame design
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "isac/priors.hpp"

using namespace isac;

namespace
{
    // 99th percentile of chi^2 with df degrees of freedom
    // (Wilson-Hilferty approximation, adequate for df >= 5)
    double chi2_crit_99(int df)
    {
        double k = double(df);
        double t = 1.0 - 2.0 / (9.0 * k) + 2.326348 * std::sqrt(2.0 / (9.0 * k));
        return k * t * t * t;
    }

    double von_mises_density(double x, double mu, double kappa)
    {
        // exp(kappa(cos(x-mu)-1)) / (2 pi I0(kappa) e^-kappa) stays finite
        // for large kappa
        double i0_scaled = std::cyl_bessel_i(0.0, kappa) * std::exp(-kappa);
        return std::exp(kappa * (std::cos(x - mu) - 1.0)) / (2.0 * pi * i0_scaled);
    }

    // chi^2 goodness of fit of draws against the von Mises density with
    // Simpson-rule bin probabilities; adjacent bins merged below 5 expected
    bool von_mises_gof(double mu, double kappa, int n_draws, std::uint64_t seed)
    {
        const int n_bins = 50;
        Rng rng(seed);
        std::vector<long> counts(n_bins, 0);
        for (int i = 0; i < n_draws; ++i)
        {
            double x = sample_von_mises(mu, kappa, rng);
            int b = int((x + pi) / (2.0 * pi) * n_bins);
            counts[size_t(std::clamp(b, 0, n_bins - 1))]++;
        }
        std::vector<double> expected(n_bins);
        for (int b = 0; b < n_bins; ++b)
        {
            double lo = -pi + 2.0 * pi * b / n_bins;
            double hi = -pi + 2.0 * pi * (b + 1) / n_bins;
            double p = 0.0; // composite Simpson over 8 sub-intervals
            int steps = 8;
            double h = (hi - lo) / steps;
            for (int s = 0; s < steps; ++s)
            {
                double a = lo + s * h;
                p += h / 6.0 *
                     (von_mises_density(a, mu, kappa) +
                      4.0 * von_mises_density(a + h / 2.0, mu, kappa) +
                      von_mises_density(a + h, mu, kappa));
            }
            expected[size_t(b)] = p * n_draws;
        }
        // merge low-expectation bins into their left neighbour (circularly)
        std::vector<double> obs_m, exp_m;
        double co = 0.0, ce = 0.0;
        for (int b = 0; b < n_bins; ++b)
        {
            co += double(counts[size_t(b)]);
            ce += expected[size_t(b)];
            if (ce >= 5.0)
            {
                obs_m.push_back(co);
                exp_m.push_back(ce);
                co = ce = 0.0;
            }
        }
        if (ce > 0.0 && !exp_m.empty())
        {
            obs_m.back() += co;
            exp_m.back() += ce;
        }
        double chi2 = 0.0;
        for (size_t b = 0; b < exp_m.size(); ++b)
            chi2 += (obs_m[b] - exp_m[b]) * (obs_m[b] - exp_m[b]) / exp_m[b];
        return chi2 <= chi2_crit_99(int(exp_m.size()) - 1);
    }
}

TEST_CASE("kappa=0 reduces to the uniform circle (KS test at 1%)")
{
    const int n = 100000;
    Rng rng(5);
    std::vector<double> xs(n);
    for (int i = 0; i < n; ++i)
        xs[size_t(i)] = sample_von_mises(0.7, 0.0, rng);
    std::sort(xs.begin(), xs.end());
    double ks = 0.0;
    for (int i = 0; i < n; ++i)
    {
        double f = (xs[size_t(i)] + pi) / (2.0 * pi);
        ks = std::max(ks, std::abs(f - double(i + 1) / n));
        ks = std::max(ks, std::abs(f - double(i) / n));
    }
    CHECK(ks < 1.628 / std::sqrt(double(n)));
}

TEST_CASE("huge kappa concentrates at the mean")
{
    Rng rng(6);
    int outliers = 0;
    for (int i = 0; i < 1000; ++i)
        if (std::abs(sample_von_mises(0.3, 1e6, rng) - 0.3) > 0.01)
            ++outliers;
    CHECK(outliers <= 5); // each draw misses with prob < 1e-3
}

TEST_CASE("kappa=4 circular mean direction matches mu")
{
    Rng rng(7);
    cplx acc = 0.0;
    for (int i = 0; i < 100000; ++i)
        acc += std::exp(cplx(0.0, sample_von_mises(-1.1, 4.0, rng)));
    CHECK(std::abs(wrap_angle(std::arg(acc) + 1.1)) < 0.05);
}

TEST_CASE("negative kappa is rejected")
{
    Rng rng(1);
    CHECK_THROWS_AS(sample_von_mises(0.0, -1.0, rng), ConfigError);
}

TEST_CASE("von Mises goodness of fit across concentration levels")
{
    CHECK(von_mises_gof(0.4, 0.0, 100000, 21));
    CHECK(von_mises_gof(-0.9, 1.0, 100000, 22));
    CHECK(von_mises_gof(0.0, 4.0, 100000, 23));
    CHECK(von_mises_gof(1.2, 100.0, 100000, 24));
}

TEST_CASE("eta sampling matches the declared prior moments")
{
    TargetPriorSet pri;
    pri.sigma0_sq = 0.8;
    pri.targets.push_back({0.3, 0.1, 1.0});
    pri.targets.push_back({-0.5, 0.2, 1.0});

    Rng rng(9);
    const int n = 100000;
    double e_abs2 = 0.0, cross = 0.0;
    for (int i = 0; i < n; ++i)
    {
        EtaSample eta = sample_eta(pri, rng);
        REQUIRE(eta.n_targets() == 2);
        e_abs2 += std::norm(eta.alpha(0));
        cross += eta.re_alpha[1] * eta.im_alpha[1];
    }
    e_abs2 /= n;
    cross /= n;
    CHECK(std::abs(e_abs2 - 0.8) / 0.8 < 0.02);
    // Re/Im independent: sample covariance within 3 sigma of zero
    CHECK(std::abs(cross) < 3.0 * 0.4 / std::sqrt(double(n)));

    Rng r1(33), r2(33);
    EtaSample s1 = sample_eta(pri, r1), s2 = sample_eta(pri, r2);
    CHECK((s1.theta - s2.theta).norm() == 0.0);
    CHECK((s1.re_alpha - s2.re_alpha).norm() == 0.0);
}

TEST_CASE("per-component variance switch changes the sampling scale")
{
    TargetPriorSet pri;
    pri.sigma0_sq = 0.5;
    pri.per_component_variance = true;
    pri.targets.push_back({0.0, 0.1, 1.0});
    Rng rng(10);
    double acc = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i)
        acc += std::norm(sample_eta(pri, rng).alpha(0));
    CHECK(std::abs(acc / n - 1.0) < 0.02); // two components of variance 0.5
}

TEST_CASE("prior FIM is the diagonal of the declared precisions")
{
    TargetPriorSet pri;
    pri.sigma0_sq = 0.5;
    pri.targets.push_back({0.1, 0.5, 1.0}); // kappa = 4

    Eigen::MatrixXd jp = prior_fim(pri);
    REQUIRE(jp.rows() == 3);
    CHECK((jp - Eigen::Vector3d(1.0, 1.0, 4.0).asDiagonal().toDenseMatrix()).norm() < 1e-14);

    pri.targets.push_back({-0.7, 0.25, 1.0}); // kappa = 16
    Eigen::MatrixXd jp2 = prior_fim(pri);
    REQUIRE(jp2.rows() == 6);
    CHECK((jp2 - Eigen::MatrixXd(jp2.diagonal().asDiagonal())).norm() == 0.0);
    Eigen::VectorXd ev = jp2.diagonal();
    std::sort(ev.data(), ev.data() + ev.size());
    Eigen::VectorXd want(6);
    want << 1.0, 1.0, 1.0, 1.0, 4.0, 16.0;
    CHECK((ev - want).norm() < 1e-14);
}

TEST_CASE("prior validation")
{
    TargetPriorSet pri;
    pri.sigma0_sq = -1.0;
    pri.targets.push_back({0.0, 0.1, 1.0});
    CHECK_THROWS_AS(pri.validate(), ConfigError);
    pri.sigma0_sq = 1.0;
    pri.targets[0].sigma_theta = 0.0;
    CHECK_THROWS_AS(pri.validate(), ConfigError);
}
