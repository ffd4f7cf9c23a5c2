// SPDX-License-Identifier: Apache-2.0
//
// secure-isac: secure dual-functional sensing/communication frame design
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------
//
// Interior-point solver checks: analytic minima, feasibility and KKT
// residuals on random instances, cross-validation against the dense
// barrier method, max-slack problems, and infeasibility detection.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <isac/solver.hpp>
#include <isac/util.hpp>

#include <cmath>

using namespace isac;

namespace
{
    // Scatter a per-slot row coefficient vector into the full variable space.
    Eigen::VectorXd full_row(const SlotBallProblem &prob, const LinearRow &row)
    {
        Eigen::VectorXd a = Eigen::VectorXd::Zero(prob.n_slots * prob.dim);
        a.segment(row.slot * prob.dim, prob.dim) = row.a;
        return a;
    }

    double worst_violation(const SlotBallProblem &prob, const Eigen::VectorXd &y,
                           double t)
    {
        double v = y.norm() - std::sqrt(prob.radius_sq);
        for (const auto &row : prob.rows)
        {
            double lhs = row.a.dot(y.segment(row.slot * prob.dim, prob.dim)) +
                         row.t_coef * t - row.b;
            v = std::max(v, lhs / std::max(row.a.norm(), 1e-300));
        }
        return v;
    }

    // Express the slot/ball problem as a DenseSocpProblem: each linear row
    // becomes a degenerate cone ||0|| <= -a.y + b.
    DenseSocpProblem as_dense(const SlotBallProblem &prob, const Eigen::VectorXd &c)
    {
        int n = prob.n_slots * prob.dim;
        DenseSocpProblem d;
        d.obj = c;
        d.eq = Eigen::MatrixXd::Zero(0, n);
        d.eq_rhs = Eigen::VectorXd::Zero(0);
        d.radius_sq = prob.radius_sq;
        for (const auto &row : prob.rows)
        {
            SocConstraint soc;
            soc.a = Eigen::MatrixXd::Zero(0, n);
            soc.b = Eigen::VectorXd::Zero(0);
            soc.c = -full_row(prob, row);
            soc.d = row.b;
            d.socs.push_back(soc);
        }
        return d;
    }
}

TEST_CASE("inactive row leaves the analytic ball minimiser -R c/|c|")
{
    SlotBallProblem prob;
    prob.n_slots = 3;
    prob.dim = 4;
    prob.radius_sq = 2.5;

    Rng rng(11);
    Eigen::VectorXd c(12);
    for (int i = 0; i < 12; ++i)
        c[i] = rng.gaussian();

    // row-free problems are the caller's closed form, not the solver's job
    CHECK_THROWS_AS(solve_linear_ball(prob, c, 0.0), ConfigError);

    // a half-space far outside the ball cannot bind
    LinearRow slack;
    slack.slot = 1;
    slack.a = Eigen::VectorXd::Ones(4);
    slack.b = 50.0;
    prob.rows.push_back(slack);

    IpmSolution sol = solve_linear_ball(prob, c, 0.0);
    CHECK(sol.status == SolveStatus::optimal);
    Eigen::VectorXd expect = -std::sqrt(prob.radius_sq) / c.norm() * c;
    CHECK((sol.y - expect).norm() < 1e-6);
    CHECK(sol.objective == doctest::Approx(c.dot(expect)).epsilon(1e-8));
}

TEST_CASE("random instances: feasible, small KKT residual, barrier agreement")
{
    Rng rng(202);
    for (int trial = 0; trial < 25; ++trial)
    {
        SlotBallProblem prob;
        prob.n_slots = 1 + int(rng.uniform() * 3.0);
        prob.dim = 2 + int(rng.uniform() * 3.0);
        prob.radius_sq = 0.5 + 2.0 * rng.uniform();
        int n = prob.n_slots * prob.dim;

        // b > 0 keeps the origin strictly feasible for both solvers
        int n_rows = 1 + int(rng.uniform() * double(2 * n));
        for (int r = 0; r < n_rows; ++r)
        {
            LinearRow row;
            row.slot = int(rng.uniform() * prob.n_slots);
            row.a.resize(prob.dim);
            for (int i = 0; i < prob.dim; ++i)
                row.a[i] = rng.gaussian();
            row.b = 0.05 + rng.uniform();
            prob.rows.push_back(row);
        }

        Eigen::VectorXd c(n);
        for (int i = 0; i < n; ++i)
            c[i] = rng.gaussian();

        IpmSolution sol = solve_linear_ball(prob, c, 0.0);
        CHECK(sol.status == SolveStatus::optimal);
        CHECK(worst_violation(prob, sol.y, sol.t) < 1e-7);
        CHECK(sol.kkt_stationarity < 1e-7);

        Eigen::VectorXd oracle =
            solve_socp_barrier(as_dense(prob, c), Eigen::VectorXd::Zero(n), 1e-10);
        double scale = std::max(1.0, std::abs(c.dot(oracle)));
        CHECK(std::abs(sol.objective - c.dot(oracle)) / scale < 1e-6);
        CHECK(sol.objective <= c.dot(oracle) + 1e-6 * scale);
    }
}

TEST_CASE("shared-slack maximisation finds the bottleneck margin")
{
    // t <= 1 - y1 and t <= 1 + y1 inside a generous ball: max t = 1 at y1 = 0
    SlotBallProblem prob;
    prob.n_slots = 1;
    prob.dim = 2;
    prob.has_t = true;
    prob.radius_sq = 100.0;

    LinearRow r1;
    r1.slot = 0;
    r1.a = Eigen::Vector2d(1.0, 0.0);
    r1.t_coef = 1.0;
    r1.b = 1.0;
    LinearRow r2 = r1;
    r2.a = Eigen::Vector2d(-1.0, 0.0);
    prob.rows = {r1, r2};

    Eigen::VectorXd c = Eigen::VectorXd::Zero(2);
    IpmSolution sol = solve_linear_ball(prob, c, -1.0);
    CHECK(sol.status == SolveStatus::optimal);
    CHECK(sol.t == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(std::abs(sol.y[0]) < 1e-6);
}

TEST_CASE("shared-slack maximisation across slots is limited by the tightest slot")
{
    // slot 0: t <= 2 - y, t <= 2 + y;  slot 1: t <= 0.5 - y, t <= 0.5 + y
    SlotBallProblem prob;
    prob.n_slots = 2;
    prob.dim = 1;
    prob.has_t = true;
    prob.radius_sq = 50.0;
    for (int slot = 0; slot < 2; ++slot)
    {
        double b = slot == 0 ? 2.0 : 0.5;
        for (double sgn : {1.0, -1.0})
        {
            LinearRow row;
            row.slot = slot;
            row.a = Eigen::VectorXd::Constant(1, sgn);
            row.t_coef = 1.0;
            row.b = b;
            prob.rows.push_back(row);
        }
    }
    IpmSolution sol = solve_linear_ball(prob, Eigen::VectorXd::Zero(2), -1.0);
    CHECK(sol.status == SolveStatus::optimal);
    CHECK(sol.t == doctest::Approx(0.5).epsilon(1e-7));
}

TEST_CASE("a row incompatible with the ball is reported infeasible")
{
    // y1 <= -2R cannot hold inside ||y|| <= R
    SlotBallProblem prob;
    prob.n_slots = 1;
    prob.dim = 2;
    prob.radius_sq = 1.0;
    LinearRow row;
    row.slot = 0;
    row.a = Eigen::Vector2d(1.0, 0.0);
    row.b = -2.0;
    prob.rows.push_back(row);

    IpmSolution sol = solve_linear_ball(prob, Eigen::Vector2d(1.0, 1.0), 0.0);
    CHECK(sol.status != SolveStatus::optimal);
    CHECK(worst_violation(prob, sol.y, sol.t) > 1e-3);
}

TEST_CASE("active linear row: minimum sits on the half-space boundary")
{
    // min -y1 s.t. y1 <= 0.3 inside unit ball: y1 = 0.3 exactly
    SlotBallProblem prob;
    prob.n_slots = 1;
    prob.dim = 2;
    prob.radius_sq = 1.0;
    LinearRow row;
    row.slot = 0;
    row.a = Eigen::Vector2d(1.0, 0.0);
    row.b = 0.3;
    prob.rows.push_back(row);

    IpmSolution sol = solve_linear_ball(prob, Eigen::Vector2d(-1.0, 0.0), 0.0);
    CHECK(sol.status == SolveStatus::optimal);
    CHECK(sol.y[0] == doctest::Approx(0.3).epsilon(1e-7));
    CHECK(std::abs(sol.y[1]) < 1e-6);
}

TEST_CASE("dense barrier: ball-only and equality-constrained sanity")
{
    int n = 5;
    Rng rng(7);
    DenseSocpProblem d;
    d.obj.resize(n);
    for (int i = 0; i < n; ++i)
        d.obj[i] = rng.gaussian();
    d.eq = Eigen::MatrixXd::Zero(0, n);
    d.eq_rhs = Eigen::VectorXd::Zero(0);
    d.radius_sq = 4.0;

    Eigen::VectorXd v = solve_socp_barrier(d, Eigen::VectorXd::Zero(n), 1e-10);
    Eigen::VectorXd expect = -2.0 / d.obj.norm() * d.obj;
    CHECK((v - expect).norm() < 1e-6);

    // pin v1 = 0.3; the rest minimises the remaining objective on the
    // residual ball of radius sqrt(4 - 0.09)
    DenseSocpProblem e = d;
    e.eq = Eigen::MatrixXd::Zero(1, n);
    e.eq(0, 0) = 1.0;
    e.eq_rhs = Eigen::VectorXd::Constant(1, 0.3);
    Eigen::VectorXd start = Eigen::VectorXd::Zero(n);
    start[0] = 0.3;
    Eigen::VectorXd w = solve_socp_barrier(e, start, 1e-10);
    CHECK(w[0] == doctest::Approx(0.3).epsilon(1e-9));
    Eigen::VectorXd tail = d.obj.tail(n - 1);
    Eigen::VectorXd tail_expect =
        -std::sqrt(4.0 - 0.09) / tail.norm() * tail;
    CHECK((w.tail(n - 1) - tail_expect).norm() < 1e-6);

    CHECK_THROWS_AS(
        solve_socp_barrier(e, Eigen::VectorXd::Constant(n, 10.0), 1e-8),
        InfeasibleError);
}

TEST_CASE("dense barrier honours a genuine second-order cone")
{
    // min -v3 s.t. ||(v1, v2)|| <= v3, ball radius 2: v3 = sqrt(2) at
    // v1 = v2 = +/- boundary? No: cone forces v1^2 + v2^2 <= v3^2 and
    // v1^2 + v2^2 + v3^2 <= 4; optimum pushes v1 = v2 = 0, v3 = 2.
    DenseSocpProblem d;
    d.obj = Eigen::Vector3d(0.0, 0.0, -1.0);
    d.eq = Eigen::MatrixXd::Zero(0, 3);
    d.eq_rhs = Eigen::VectorXd::Zero(0);
    d.radius_sq = 4.0;
    SocConstraint soc;
    soc.a = Eigen::MatrixXd::Zero(2, 3);
    soc.a(0, 0) = 1.0;
    soc.a(1, 1) = 1.0;
    soc.b = Eigen::VectorXd::Zero(2);
    soc.c = Eigen::Vector3d(0.0, 0.0, 1.0);
    soc.d = 0.0;

    d.socs.push_back(soc);
    Eigen::VectorXd start(3);
    start << 0.1, 0.1, 1.0;
    Eigen::VectorXd v = solve_socp_barrier(d, start, 1e-10);
    CHECK(std::abs(v[0]) < 1e-5);
    CHECK(std::abs(v[1]) < 1e-5);
    CHECK(v[2] == doctest::Approx(2.0).epsilon(1e-6));
}
