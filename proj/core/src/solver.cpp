// SPDX-License-Identifier: Apache-2.0
//
// secure-isac: secure dual-functional sensing/communication frame design
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#include "isac/solver.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <cstdio>

#include "isac/util.hpp"

namespace isac
{
    namespace
    {
        struct ScaledProblem
        {
            int n_slots, dim, m;
            bool has_t;
            double radius;          // original ball radius
            double obj_scale;       // objective values scale back by this
            Eigen::VectorXd c;      // scaled objective, x part (n)
            double c_t;
            std::vector<Eigen::VectorXd> row_a; // unit rows
            std::vector<double> row_e, row_b;
            std::vector<int> row_slot;
            std::vector<std::vector<int>> slot_rows;
        };

        ScaledProblem scale_problem(const SlotBallProblem &prob,
                                    const Eigen::VectorXd &c, double c_t)
        {
            ScaledProblem sp;
            sp.n_slots = prob.n_slots;
            sp.dim = prob.dim;
            sp.m = int(prob.rows.size());
            sp.has_t = prob.has_t;
            sp.radius = std::sqrt(prob.radius_sq);
            sp.obj_scale = std::max(sp.radius * std::hypot(c.norm(), c_t), 1e-300);
            sp.c = c * (sp.radius / sp.obj_scale);
            sp.c_t = c_t * (sp.radius / sp.obj_scale);
            sp.slot_rows.resize(size_t(prob.n_slots));
            for (const auto &row : prob.rows)
            {
                double nrm = std::hypot(row.a.norm(), row.t_coef);
                if (!(nrm > 0.0))
                    throw ConfigError("solve_linear_ball: zero constraint row");
                sp.row_a.push_back(row.a / nrm);
                sp.row_e.push_back(row.t_coef / nrm);
                sp.row_b.push_back(row.b / (nrm * sp.radius));
                sp.row_slot.push_back(row.slot);
                sp.slot_rows[size_t(row.slot)].push_back(int(sp.row_a.size()) - 1);
            }
            return sp;
        }

        // Solves (blockdiag(B_l) + arrow(u, gamma)) [dx; dt] = [rx; rt].
        // Blocks can be exactly singular when the ball multiplier vanishes
        // and a slot has fewer active rows than dimensions, so each block
        // carries a scale-aware ridge and the solve does one pass of
        // iterative refinement against the unregularized operator.
        struct ArrowSolver
        {
            std::vector<Eigen::LDLT<Eigen::MatrixXd>> block_llt;
            std::vector<Eigen::MatrixXd> block; // unregularized B_l
            std::vector<Eigen::VectorXd> u;     // per slot t coupling
            double gamma = 0.0;
            bool has_t = false;
            int dim = 0;
            std::vector<Eigen::VectorXd> binv_u;
            double schur = 1.0;

            void factor(const ScaledProblem &sp, const Eigen::VectorXd &d, double nu)
            {
                int ns = sp.n_slots;
                dim = sp.dim;
                has_t = sp.has_t;
                block_llt.resize(size_t(ns));
                block.assign(size_t(ns), Eigen::MatrixXd());
                u.assign(size_t(ns), Eigen::VectorXd::Zero(dim));
                gamma = 1e-13;
                for (int l = 0; l < ns; ++l)
                {
                    Eigen::MatrixXd b = (2.0 * nu) * Eigen::MatrixXd::Identity(dim, dim);
                    for (int i : sp.slot_rows[size_t(l)])
                    {
                        b.noalias() += d[i] * sp.row_a[size_t(i)] * sp.row_a[size_t(i)].transpose();
                        if (has_t)
                        {
                            u[size_t(l)].noalias() += d[i] * sp.row_e[size_t(i)] * sp.row_a[size_t(i)];
                            gamma += d[i] * sp.row_e[size_t(i)] * sp.row_e[size_t(i)];
                        }
                    }
                    block[size_t(l)] = b;
                    double ridge = 1e-12 * std::max(1.0, b.diagonal().maxCoeff());
                    b.diagonal().array() += ridge;
                    block_llt[size_t(l)].compute(b);
                }
                if (has_t)
                {
                    binv_u.resize(size_t(ns));
                    schur = gamma;
                    for (int l = 0; l < ns; ++l)
                    {
                        binv_u[size_t(l)] = block_solve(l, u[size_t(l)]);
                        schur -= u[size_t(l)].dot(binv_u[size_t(l)]);
                    }
                    // near-exact cancellation when the blocks lose rank;
                    // keep a relative floor and let the refinement passes
                    // correct the distortion
                    schur = std::max(schur, 1e-10 * gamma);
                }
            }

            Eigen::VectorXd block_solve(int l, const Eigen::VectorXd &r) const
            {
                Eigen::VectorXd x = block_llt[size_t(l)].solve(r);
                x += block_llt[size_t(l)].solve(r - block[size_t(l)] * x);
                return x;
            }

            void solve(const Eigen::VectorXd &rx, double rt,
                       Eigen::VectorXd *dx, double *dt) const
            {
                int ns = int(block_llt.size());
                dx->resize(rx.size());
                if (!has_t)
                {
                    for (int l = 0; l < ns; ++l)
                        dx->segment(l * dim, dim) = block_solve(l, rx.segment(l * dim, dim));
                    *dt = 0.0;
                    return;
                }
                double acc = rt;
                std::vector<Eigen::VectorXd> p0(static_cast<size_t>(ns));
                for (int l = 0; l < ns; ++l)
                {
                    p0[size_t(l)] = block_solve(l, rx.segment(l * dim, dim));
                    acc -= u[size_t(l)].dot(p0[size_t(l)]);
                }
                *dt = acc / schur;
                for (int l = 0; l < ns; ++l)
                    dx->segment(l * dim, dim) = p0[size_t(l)] - (*dt) * binv_u[size_t(l)];
            }
        };

        double max_step(const Eigen::VectorXd &v, const Eigen::VectorXd &dv,
                        double scalar, double dscalar)
        {
            double a = 1e30;
            for (int i = 0; i < v.size(); ++i)
                if (dv[i] < 0.0)
                    a = std::min(a, -v[i] / dv[i]);
            if (dscalar < 0.0)
                a = std::min(a, -scalar / dscalar);
            return a;
        }
    }

    IpmSolution solve_linear_ball(const SlotBallProblem &prob,
                                  const Eigen::VectorXd &c, double c_t,
                                  const IpmOptions &opts)
    {
        ScaledProblem sp = scale_problem(prob, c, c_t);
        const int n = sp.n_slots * sp.dim;
        const int m = sp.m;
        if (m == 0)
            throw ConfigError("solve_linear_ball: use the closed form for row-free problems");

        Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
        double t = 0.0;
        Eigen::VectorXd s = Eigen::VectorXd::Ones(m);
        Eigen::VectorXd z = Eigen::VectorXd::Ones(m);
        double w = 1.0, nu = 1.0;
        if (sp.has_t)
        {
            // start primal-feasible: pull t below every right-hand side so
            // all slacks are positive at y = 0 and stay centered
            double bmin = 0.0;
            for (double b : sp.row_b)
                bmin = std::min(bmin, b);
            t = bmin - 1.0;
            for (int i = 0; i < m; ++i)
            {
                s[i] = sp.row_b[size_t(i)] - sp.row_e[size_t(i)] * t;
                if (s[i] <= 0.0)
                    s[i] = 1.0; // row not coupled to t; fall back
            }
        }

        double bmax = 0.0;
        for (double b : sp.row_b)
            bmax = std::max(bmax, std::abs(b));
        double cmax = std::max(sp.c.lpNorm<Eigen::Infinity>(), std::abs(sp.c_t));

        IpmSolution sol;
        ArrowSolver arrow;
        Eigen::VectorXd f1x(n), f2(m), d(m), g(m);

        // the endgame can destabilize once mu reaches machine noise, so we
        // keep the best iterate seen and fall back to it
        double best_merit = 1e300;
        Eigen::VectorXd best_y = y, best_z = z;
        double best_t = t, best_pr = 1e300, best_dr = 1e300;
        int stall = 0;

        auto row_dot = [&](int i) {
            return sp.row_a[size_t(i)].dot(y.segment(sp.row_slot[size_t(i)] * sp.dim, sp.dim)) +
                   sp.row_e[size_t(i)] * t;
        };

        int it = 0;
        double pr = 0.0, dr = 0.0, mu = 0.0;
        for (; it < opts.max_iter; ++it)
        {
            // residuals
            f1x = sp.c + 2.0 * nu * y;
            double f1t = sp.c_t;
            for (int i = 0; i < m; ++i)
            {
                int l = sp.row_slot[size_t(i)];
                f1x.segment(l * sp.dim, sp.dim).noalias() += z[i] * sp.row_a[size_t(i)];
                f1t += z[i] * sp.row_e[size_t(i)];
                f2[i] = row_dot(i) + s[i] - sp.row_b[size_t(i)];
            }
            double f3 = y.squaredNorm() + w - 1.0;
            mu = (s.dot(z) + w * nu) / (m + 1);
            pr = std::max(f2.lpNorm<Eigen::Infinity>(), std::abs(f3));
            dr = std::max(f1x.lpNorm<Eigen::Infinity>(), sp.has_t ? std::abs(f1t) : 0.0);

            double merit = std::max({pr / (1.0 + bmax), dr / (1.0 + cmax), mu});
            if (merit < best_merit)
            {
                best_merit = merit;
                best_y = y;
                best_z = z;
                best_t = t;
                best_pr = pr;
                best_dr = dr;
                stall = 0;
            }
            else
            {
                ++stall;
            }
            if (merit <= opts.tol)
            {
                sol.status = SolveStatus::optimal;
                break;
            }
            if (stall >= 25 || mu < 1e-14 || !std::isfinite(pr + dr + mu))
                break;

            for (int i = 0; i < m; ++i)
                d[i] = z[i] / std::max(s[i], 1e-300);
            arrow.factor(sp, d, nu);

            Eigen::VectorXd v = (2.0 * std::sqrt(nu / std::max(w, 1e-300))) * y;
            Eigen::VectorXd dinv_v;
            double dinv_v_t;
            arrow.solve(v, 0.0, &dinv_v, &dinv_v_t);
            double sm_denom = 1.0 + v.dot(dinv_v);

            // One Newton solve for an arbitrary right-hand side of the full
            // linearized KKT system:
            //   2nu dy + 2y dnu + A^T dz (+ t-column)        = r1
            //   A dy + ds                                    = r2
            //   2 y.dy + dw                                  = r3
            //   Z ds + S dz                                  = r4
            //   nu dw + w dnu                                = r5
            auto newton_rhs = [&](const Eigen::VectorXd &r1x, double r1t,
                                  const Eigen::VectorXd &r2, double r3,
                                  const Eigen::VectorXd &r4, double r5,
                                  Eigen::VectorXd *dy, double *dt, Eigen::VectorXd *ds,
                                  Eigen::VectorXd *dz, double *dw, double *dnu) {
                Eigen::VectorXd rx = r1x;
                double rt = r1t;
                for (int i = 0; i < m; ++i)
                {
                    g[i] = (r4[i] - z[i] * r2[i]) / std::max(s[i], 1e-300);
                    int l = sp.row_slot[size_t(i)];
                    rx.segment(l * sp.dim, sp.dim).noalias() -= g[i] * sp.row_a[size_t(i)];
                    rt -= g[i] * sp.row_e[size_t(i)];
                }
                rx.noalias() -= (2.0 * (r5 - nu * r3) / std::max(w, 1e-300)) * y;

                Eigen::VectorXd p;
                double pt;
                arrow.solve(rx, rt, &p, &pt);
                double corr = v.dot(p) / sm_denom;
                *dy = p - corr * dinv_v;
                *dt = pt - corr * dinv_v_t;

                ds->resize(m);
                dz->resize(m);
                for (int i = 0; i < m; ++i)
                {
                    int l = sp.row_slot[size_t(i)];
                    double ady = sp.row_a[size_t(i)].dot(dy->segment(l * sp.dim, sp.dim)) +
                                 sp.row_e[size_t(i)] * (*dt);
                    (*ds)[i] = r2[i] - ady;
                    (*dz)[i] = (r4[i] - z[i] * (*ds)[i]) / std::max(s[i], 1e-300);
                }
                *dw = r3 - 2.0 * y.dot(*dy);
                *dnu = (r5 - nu * (*dw)) / std::max(w, 1e-300);
            };

            // Solve, then apply one pass of iterative refinement against the
            // full KKT residual; the condensed elimination loses precision
            // once z/s spans many orders of magnitude near the boundary.
            auto newton = [&](const Eigen::VectorXd &rhs4, double rhs5, double f3_eff,
                              Eigen::VectorXd *dy, double *dt, Eigen::VectorXd *ds,
                              Eigen::VectorXd *dz, double *dw, double *dnu) {
                Eigen::VectorXd r1x = -f1x;
                double r1t = -f1t;
                Eigen::VectorXd r2 = -f2;
                double r3 = -f3_eff;
                Eigen::VectorXd r4 = -rhs4;
                double r5 = -rhs5;
                newton_rhs(r1x, r1t, r2, r3, r4, r5, dy, dt, ds, dz, dw, dnu);

                Eigen::VectorXd e1x = r1x - 2.0 * nu * (*dy) - 2.0 * (*dnu) * y;
                double e1t = r1t;
                Eigen::VectorXd e2(m), e4(m);
                for (int i = 0; i < m; ++i)
                {
                    int l = sp.row_slot[size_t(i)];
                    e1x.segment(l * sp.dim, sp.dim).noalias() -=
                        (*dz)[i] * sp.row_a[size_t(i)];
                    e1t -= (*dz)[i] * sp.row_e[size_t(i)];
                    double ady = sp.row_a[size_t(i)].dot(dy->segment(l * sp.dim, sp.dim)) +
                                 sp.row_e[size_t(i)] * (*dt);
                    e2[i] = r2[i] - ady - (*ds)[i];
                    e4[i] = r4[i] - z[i] * (*ds)[i] - s[i] * (*dz)[i];
                }
                double e3 = r3 - 2.0 * y.dot(*dy) - (*dw);
                double e5 = r5 - nu * (*dw) - w * (*dnu);

                Eigen::VectorXd cy, cs, cz;
                double ct, cw, cnu;
                for (int pass = 0; pass < 3; ++pass)
                {
                    double res_norm = std::sqrt(e1x.squaredNorm() + e1t * e1t +
                                                e2.squaredNorm() + e3 * e3 +
                                                e4.squaredNorm() + e5 * e5);
                    if (res_norm < 1e-13)
                        break;
                    newton_rhs(e1x, e1t, e2, e3, e4, e5, &cy, &ct, &cs, &cz, &cw, &cnu);
                    *dy += cy;
                    *dt += ct;
                    *ds += cs;
                    *dz += cz;
                    *dw += cw;
                    *dnu += cnu;

                    e1x = r1x - 2.0 * nu * (*dy) - 2.0 * (*dnu) * y;
                    e1t = r1t;
                    for (int i = 0; i < m; ++i)
                    {
                        int l = sp.row_slot[size_t(i)];
                        e1x.segment(l * sp.dim, sp.dim).noalias() -=
                            (*dz)[i] * sp.row_a[size_t(i)];
                        e1t -= (*dz)[i] * sp.row_e[size_t(i)];
                        double ady =
                            sp.row_a[size_t(i)].dot(dy->segment(l * sp.dim, sp.dim)) +
                            sp.row_e[size_t(i)] * (*dt);
                        e2[i] = r2[i] - ady - (*ds)[i];
                        e4[i] = r4[i] - z[i] * (*ds)[i] - s[i] * (*dz)[i];
                    }
                    e3 = r3 - 2.0 * y.dot(*dy) - (*dw);
                    e5 = r5 - nu * (*dw) - w * (*dnu);
                }
            };

            // predictor
            Eigen::VectorXd dy_a, ds_a, dz_a;
            double dt_a, dw_a, dnu_a;
            Eigen::VectorXd rhs4 = s.cwiseProduct(z);
            newton(rhs4, w * nu, f3, &dy_a, &dt_a, &ds_a, &dz_a, &dw_a, &dnu_a);

            double a_aff = std::min(1.0, max_step(s, ds_a, w, dw_a));
            a_aff = std::min(a_aff, max_step(z, dz_a, nu, dnu_a));
            double mu_aff = ((s + a_aff * ds_a).dot(z + a_aff * dz_a) +
                             (w + a_aff * dw_a) * (nu + a_aff * dnu_a)) / (m + 1);
            double sigma = std::pow(std::max(mu_aff, 0.0) / mu, 3.0);

            // corrector
            Eigen::VectorXd dy_c, ds_c, dz_c;
            double dt_c, dw_c, dnu_c;
            Eigen::VectorXd rhs4c = s.cwiseProduct(z) + ds_a.cwiseProduct(dz_a) -
                                    sigma * mu * Eigen::VectorXd::Ones(m);
            double rhs5c = w * nu + dw_a * dnu_a - sigma * mu;
            double f3c = f3 + dy_a.squaredNorm();
            newton(rhs4c, rhs5c, f3c, &dy_c, &dt_c, &ds_c, &dz_c, &dw_c, &dnu_c);

            double eta = mu < 1e-6 ? 0.9995 : 0.995;
            double alpha = std::min(1.0, eta * max_step(s, ds_c, w, dw_c));
            alpha = std::min(alpha, eta * max_step(z, dz_c, nu, dnu_c));

            // when the combined step collapses, the second-order corrector
            // term is unreliable; fall back to a pure centering step, which
            // restores feasibility toward the central path at the current mu
            if (alpha < 0.1)
            {
                Eigen::VectorXd rhs4p =
                    s.cwiseProduct(z) - 0.8 * mu * Eigen::VectorXd::Ones(m);
                newton(rhs4p, w * nu - 0.8 * mu, f3, &dy_c, &dt_c, &ds_c, &dz_c,
                       &dw_c, &dnu_c);
                alpha = std::min(1.0, 0.9 * max_step(s, ds_c, w, dw_c));
                alpha = std::min(alpha, 0.9 * max_step(z, dz_c, nu, dnu_c));
            }

            y += alpha * dy_c;
            t += alpha * dt_c;
            s += alpha * ds_c;
            z += alpha * dz_c;
            w += alpha * dw_c;
            nu += alpha * dnu_c;

            if (opts.verbose)
                std::fprintf(stderr,
                             "ipm it=%3d pr=%9.2e dr=%9.2e mu=%9.2e alpha=%6.4f "
                             "sigma=%6.4f nu=%9.2e w=%9.2e t=%9.2e\n",
                             it, pr, dr, mu, alpha, sigma, nu, w, t);
        }

        // map the best iterate back and certify
        y = best_y;
        z = best_z;
        t = best_t;
        sol.iterations = it;
        sol.y = sp.radius * y;
        sol.t = sp.radius * t;
        sol.objective = sp.obj_scale * (sp.c.dot(y) + sp.c_t * t);

        double viol = std::max(0.0, y.squaredNorm() - 1.0);
        for (int i = 0; i < m; ++i)
            viol = std::max(viol, row_dot(i) - sp.row_b[size_t(i)]);
        sol.primal_residual = viol;
        sol.kkt_stationarity = best_dr;
        pr = best_pr;

        // dual bound for min c.y s.t. Ay <= b, ||y|| <= 1 with multipliers z
        Eigen::VectorXd atz = sp.c;
        double dual_b = 0.0;
        for (int i = 0; i < m; ++i)
        {
            int l = sp.row_slot[size_t(i)];
            atz.segment(l * sp.dim, sp.dim).noalias() += z[i] * sp.row_a[size_t(i)];
            dual_b += z[i] * sp.row_b[size_t(i)];
        }
        double dual_val = -dual_b - atz.norm();
        sol.dual_gap = ((sp.c.dot(y) + sp.c_t * t) - dual_val) / (1.0 + std::abs(sol.objective / sp.obj_scale));

        if (sol.status != SolveStatus::optimal)
        {
            if (best_merit <= opts.tol)
                sol.status = SolveStatus::optimal;
            else if (best_merit <= 100.0 * opts.tol &&
                     std::abs(sol.dual_gap) <= 10.0 * opts.tol)
                sol.status = SolveStatus::optimal; // certified by the gap
            else if (z.lpNorm<1>() > 1e8 && pr > 1e-6 * (1.0 + bmax))
                sol.status = SolveStatus::infeasible;
            else
                sol.status = SolveStatus::max_iter;
        }
        return sol;
    }

    // ---------------------------------------------------------------------
    // Dense barrier method for small SOCP instances

    namespace
    {
        struct BarrierEval
        {
            double phi = 0.0;
            Eigen::VectorXd grad;
            Eigen::MatrixXd hess;
            bool in_domain = false;
        };

        BarrierEval eval_barrier(const DenseSocpProblem &prob, const Eigen::VectorXd &v)
        {
            int n = int(v.size());
            BarrierEval e;
            e.grad = Eigen::VectorXd::Zero(n);
            e.hess = Eigen::MatrixXd::Zero(n, n);
            e.in_domain = true;

            double sb = prob.radius_sq - v.squaredNorm();
            if (sb <= 0.0)
            {
                e.in_domain = false;
                return e;
            }
            e.phi -= std::log(sb);
            e.grad += (2.0 / sb) * v;
            e.hess += (2.0 / sb) * Eigen::MatrixXd::Identity(n, n) +
                      (4.0 / (sb * sb)) * v * v.transpose();

            for (const auto &soc : prob.socs)
            {
                double yk = soc.c.dot(v) + soc.d;
                Eigen::VectorXd uk = soc.a * v + soc.b;
                double f = yk * yk - uk.squaredNorm();
                if (yk <= 0.0 || f <= 0.0)
                {
                    e.in_domain = false;
                    return e;
                }
                e.phi -= std::log(f);
                Eigen::VectorXd df = 2.0 * yk * soc.c - 2.0 * soc.a.transpose() * uk;
                Eigen::MatrixXd d2f = 2.0 * soc.c * soc.c.transpose() -
                                      2.0 * soc.a.transpose() * soc.a;
                e.grad -= df / f;
                e.hess += df * df.transpose() / (f * f) - d2f / f;
            }
            return e;
        }
    }

    Eigen::VectorXd solve_socp_barrier(const DenseSocpProblem &prob,
                                       const Eigen::VectorXd &start,
                                       double tol)
    {
        const int n = int(prob.obj.size());
        const int p = int(prob.eq.rows());
        const double theta = 2.0 * double(prob.socs.size()) + 1.0; // barrier complexity
        double obj_scale = std::max(prob.obj.norm(), 1e-300);
        Eigen::VectorXd c = prob.obj / obj_scale;

        Eigen::VectorXd v = start;
        if (!eval_barrier(prob, v).in_domain)
            throw InfeasibleError("solve_socp_barrier: start is not strictly feasible");

        double t_bar = 1.0;
        while (t_bar * tol < theta)
        {
            for (int inner = 0; inner < 80; ++inner)
            {
                BarrierEval e = eval_barrier(prob, v);
                Eigen::VectorXd grad = t_bar * c + e.grad;

                Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + p, n + p);
                kkt.topLeftCorner(n, n) = e.hess +
                    1e-12 * e.hess.trace() / n * Eigen::MatrixXd::Identity(n, n);
                if (p > 0)
                {
                    kkt.topRightCorner(n, p) = prob.eq.transpose();
                    kkt.bottomLeftCorner(p, n) = prob.eq;
                }
                Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + p);
                rhs.head(n) = -grad;
                Eigen::VectorXd dir = kkt.ldlt().solve(rhs).head(n);

                double decrement_sq = -grad.dot(dir);
                if (decrement_sq <= 2e-14)
                    break;

                // damped backtracking keeping the iterate strictly inside
                double step = 1.0;
                double phi0 = t_bar * c.dot(v) + e.phi;
                for (int bt = 0; bt < 60; ++bt)
                {
                    Eigen::VectorXd cand = v + step * dir;
                    BarrierEval ce = eval_barrier(prob, cand);
                    if (ce.in_domain &&
                        t_bar * c.dot(cand) + ce.phi <= phi0 - 1e-4 * step * decrement_sq)
                    {
                        v = cand;
                        break;
                    }
                    step *= 0.5;
                    if (bt == 59)
                        inner = 80; // stuck; move to next stage
                }
            }
            t_bar *= 10.0;
        }
        return v;
    }
}
