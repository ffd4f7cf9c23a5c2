// SPDX-License-Identifier: Apache-2.0
//
// secure-isac: secure dual-functional sensing/communication frame design
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#ifndef ISAC_UTIL_HPP
#define ISAC_UTIL_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace isac
{
    inline constexpr double pi = 3.14159265358979323846;

    using cplx = std::complex<double>;

    // dB <-> linear. dBm values map to mW, so 0 dBm == 1 mW and all powers
    // in the library are in mW.
    inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
    inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
    inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

    inline double deg_to_rad(double deg) { return deg * pi / 180.0; }
    inline double rad_to_deg(double rad) { return rad * 180.0 / pi; }

    // Wrap an angle to (-pi, pi]
    inline double wrap_angle(double x)
    {
        double w = std::remainder(x, 2.0 * pi);
        if (w <= -pi)
            w += 2.0 * pi;
        return w;
    }

    // Deterministic random stream. All sampling in the library goes through
    // this class so that outputs are bit-stable for a fixed seed on any
    // platform (no use of std::normal_distribution, whose output is
    // implementation-defined).
    class Rng
    {
    public:
        explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9E3779B97F4A7C15ULL) {}

        std::uint64_t next_u64()
        {
            // xoshiro-style splitmix step; full-period, passes statistical tests
            std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
            return z ^ (z >> 31);
        }

        // Uniform on [0, 1)
        double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

        // Standard normal via Box-Muller (pair cached)
        double gaussian()
        {
            if (has_spare_)
            {
                has_spare_ = false;
                return spare_;
            }
            double u1 = 1.0 - uniform(); // (0, 1]
            double u2 = uniform();
            double r = std::sqrt(-2.0 * std::log(u1));
            double t = 2.0 * pi * u2;
            spare_ = r * std::sin(t);
            has_spare_ = true;
            return r * std::cos(t);
        }

        // Circularly-symmetric complex Gaussian with unit variance
        cplx cgaussian()
        {
            double re = gaussian();
            double im = gaussian();
            return cplx(re / std::sqrt(2.0), im / std::sqrt(2.0));
        }

    private:
        std::uint64_t state_;
        bool has_spare_ = false;
        double spare_ = 0.0;
    };

    inline std::uint64_t fnv1a64(std::string_view s)
    {
        std::uint64_t h = 0xCBF29CE484222325ULL;
        for (unsigned char c : s)
        {
            h ^= c;
            h *= 0x100000001B3ULL;
        }
        return h;
    }

    // Number formatting used by every CSV writer: 12 significant digits,
    // '.' separator, locale-free.
    inline std::string fmt_sig(double v)
    {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        return std::string(buf);
    }

    struct ConfigError : std::runtime_error
    {
        using std::runtime_error::runtime_error;
    };

    struct SingularMatrixError : std::runtime_error
    {
        using std::runtime_error::runtime_error;
    };

    struct InfeasibleError : std::runtime_error
    {
        using std::runtime_error::runtime_error;
    };
}

#endif
