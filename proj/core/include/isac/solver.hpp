// SPDX-License-Identifier: Apache-2.0
//
// secure-isac: secure dual-functional sensing/communication frame design
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#ifndef ISAC_SOLVER_HPP
#define ISAC_SOLVER_HPP

#include <Eigen/Dense>
#include <vector>

namespace isac
{
    // One linear inequality a . y_slot + t_coef * t <= b touching a single
    // slot's real coordinates (plus the optional shared scalar t).
    struct LinearRow
    {
        int slot = 0;
        Eigen::VectorXd a;
        double t_coef = 0.0;
        double b = 0.0;
    };

    // min c . y + c_t t  s.t. rows, sum_l ||y_l||^2 <= radius_sq
    //
    // Variables split into n_slots blocks of size dim; every linear row
    // touches exactly one block, the norm ball couples all of them. The
    // Newton systems of the interior-point method are block-diagonal plus a
    // rank-one ball term plus an optional arrow for t, so one iteration
    // costs O(n_slots dim^3).
    struct SlotBallProblem
    {
        int n_slots = 1;
        int dim = 1;
        bool has_t = false;
        double radius_sq = 1.0;
        std::vector<LinearRow> rows;
    };

    enum class SolveStatus
    {
        optimal,
        max_iter,
        infeasible
    };

    struct IpmSolution
    {
        Eigen::VectorXd y;
        double t = 0.0;
        SolveStatus status = SolveStatus::max_iter;
        double objective = 0.0;
        double primal_residual = 0.0;  // max constraint violation at y
        double dual_gap = 0.0;         // certified duality gap (relative)
        double kkt_stationarity = 0.0; // scaled stationarity residual
        int iterations = 0;
    };

    struct IpmOptions
    {
        double tol = 1e-9;
        int max_iter = 200;
        bool verbose = false; // per-iteration diagnostics on stderr
    };

    IpmSolution solve_linear_ball(const SlotBallProblem &prob,
                                  const Eigen::VectorXd &c, double c_t,
                                  const IpmOptions &opts = {});

    // ||A v + b|| <= c . v + d
    struct SocConstraint
    {
        Eigen::MatrixXd a;
        Eigen::VectorXd b;
        Eigen::VectorXd c;
        double d = 0.0;
    };

    // min obj . v  s.t.  eq v = eq_rhs, SOC constraints, ||v||^2 <= radius_sq
    //
    // Small dense problems only (the block-level benchmark). Solved by a
    // feasible-start barrier method; the caller supplies a strictly feasible
    // start satisfying the equalities exactly.
    struct DenseSocpProblem
    {
        Eigen::VectorXd obj;
        Eigen::MatrixXd eq;     // may have zero rows
        Eigen::VectorXd eq_rhs;
        double radius_sq = 1.0;
        std::vector<SocConstraint> socs;
    };

    Eigen::VectorXd solve_socp_barrier(const DenseSocpProblem &prob,
                                       const Eigen::VectorXd &start,
                                       double tol = 1e-9);
}

#endif
