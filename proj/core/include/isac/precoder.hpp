// SPDX-License-Identifier: Apache-2.0
//
// secure-isac: secure dual-functional sensing/communication frame design
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#ifndef ISAC_PRECODER_HPP
#define ISAC_PRECODER_HPP

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "isac/bfim.hpp"
#include "isac/solver.hpp"

namespace isac
{
    // Intended unit-modulus PSK symbols, users x slots
    struct SymbolFrame
    {
        Eigen::MatrixXcd s;
    };

    SymbolFrame random_symbol_frame(const SystemConfig &cfg, std::uint64_t seed);

    // Linear inequalities over the per-slot real coordinates [Re x_l; Im x_l]
    // plus the Frobenius power ball ||X||_F^2 <= L P_T.
    struct ConstraintSet
    {
        int n_slots = 0;
        int dim = 0; // 2 n_tx
        double ball_radius_sq = 0.0;
        int di_case = 0; // 0 = none
        std::vector<LinearRow> rows;

        // max_i (a_i . y - b_i)+ and ball excess at a frame
        double max_violation(const Eigen::MatrixXcd &x_frame) const;
        bool is_feasible(const Eigen::MatrixXcd &x_frame, double tol = 1e-8) const;
    };

    // Rotated user observation v = s_{k,l}^* h_k^H x_l and Eve observation
    // u = s_{1,l}^* beta_n a(mu_n)^H x_l used throughout
    cplx rotated_user_point(const Eigen::VectorXcd &h, cplx symbol, const Eigen::VectorXcd &x);

    // Signed distance to the constructive region boundary (>= 0 inside):
    // min over the two half-space slacks of (Re v - thresh) tan(phi) -+ Im v
    double ci_margin(cplx v, double thresh, double tan_phi);

    // Membership in the destructive region (20d): |Im u| >= (Re u - tau) tan(phi)
    bool di_region_contains(cplx u, double tau, double tan_phi);
    // Membership in one of the three convex zones covering it
    bool di_case_contains(int di_case, cplx u, double tau, double tan_phi);

    // Per-user amplitude threshold sqrt(sigma_k^2 Gamma_k)
    std::vector<double> ci_thresholds(const SystemConfig &cfg, const std::vector<double> &gamma_db);
    // Per-Eve level tau_n = sqrt(sigma_E,n^2 10^(tau_dB/10))
    std::vector<double> di_thresholds(const SystemConfig &cfg, const std::vector<double> &tau_db);

    std::vector<LinearRow> build_ci_constraints(const CommChannelSet &channels,
                                                const SymbolFrame &symbols,
                                                const std::vector<double> &gamma_db,
                                                const SystemConfig &cfg);

    std::vector<LinearRow> build_di_constraints(int di_case,
                                                const TargetPriorSet &priors,
                                                const SymbolFrame &symbols,
                                                const std::vector<double> &tau_db,
                                                const SystemConfig &cfg);

    ConstraintSet make_constraint_set(const SystemConfig &cfg,
                                      const std::vector<LinearRow> &ci_rows,
                                      const std::vector<LinearRow> &di_rows,
                                      int di_case);

    struct SubproblemSolution
    {
        Eigen::MatrixXcd x_star;
        double objective = 0.0;
        double primal_residual = 0.0;
        double dual_gap = 0.0;
        SolveStatus status = SolveStatus::max_iter;
        int iterations = 0;
    };

    // min Re tr(G^H X) over the constraint set. With no linear rows the
    // ball-boundary optimum is returned in closed form.
    SubproblemSolution solve_subproblem(const Eigen::MatrixXcd &gradient,
                                        const ConstraintSet &constraints);

    struct Phase1Result
    {
        bool feasible = false;
        double slack = 0.0; // optimal minimum row slack (normalized rows)
        Eigen::MatrixXcd x0;
    };

    // Maximize the minimum slack across linear rows subject to the ball
    Phase1Result phase1_feasible(const ConstraintSet &constraints);

    struct LineSearchResult
    {
        double lambda = 1.0;
        double f_new = 0.0;
    };

    // Armijo backtracking (c1 = 1e-4, factor 0.5, lambda0 = 1) along
    // direction = x_star - x_prev; directional derivative from the gradient.
    LineSearchResult line_search(const std::function<double(const Eigen::MatrixXcd &)> &f,
                                 const Eigen::MatrixXcd &x_prev, double f_prev,
                                 const Eigen::MatrixXcd &gradient,
                                 const Eigen::MatrixXcd &x_star,
                                 double lambda0 = 1.0);

    struct SolverOptions
    {
        double epsilon = 1e-5; // relative stationarity threshold
        int max_outer = 50;
        BfimOptions bfim;
        // Feasible warm-start candidates (tried per DI case)
        std::vector<Eigen::MatrixXcd> warm_starts;
        int workers = 1; // >1 runs the three DI cases concurrently
    };

    struct CaseReport
    {
        int di_case = 0;
        bool feasible = false;
        std::vector<double> objective_trace;
        int iterations = 0;
        std::string termination; // stationary | max-iter | infeasible
        double final_bcrb = 0.0;
    };

    struct SolveReport
    {
        std::vector<CaseReport> cases;
        int chosen_case = 0;
        double final_bcrb = 0.0;
        std::string termination;
    };

    struct DesignResult
    {
        Eigen::MatrixXcd x_frame;
        SolveReport report;
    };

    // Algorithm: three DI-case subproblem chains (phase-1 init, iterate
    // gradient -> linearized subproblem -> Armijo), winner by final BCRB.
    // Throws InfeasibleError when all three cases are infeasible.
    DesignResult sca_design(const SystemConfig &cfg,
                            const CommChannelSet &channels,
                            const SymbolFrame &symbols,
                            const TargetPriorSet &priors,
                            const ExpectationFactors &factors,
                            const std::vector<double> &gamma_db,
                            const std::vector<double> &tau_db,
                            const SolverOptions &opts = {});

    struct BlockLevelResult
    {
        Eigen::MatrixXcd w;       // n_tx x n_users precoding matrix
        Eigen::MatrixXcd x_frame; // W S for a random PSK symbol frame
        double final_bcrb = 0.0;
        std::vector<double> objective_trace;
        std::string termination;
    };

    // Block-level benchmark: minimize the BCRB over W with R_x = W W^H under
    // per-user SINR >= Gamma_k (phase-rotated second-order-cone form) and
    // tr(W W^H) <= P_T.
    BlockLevelResult block_level_design(const SystemConfig &cfg,
                                        const CommChannelSet &channels,
                                        const TargetPriorSet &priors,
                                        const ExpectationFactors &factors,
                                        const std::vector<double> &gamma_db,
                                        std::uint64_t symbol_seed,
                                        const SolverOptions &opts = {});
}

#endif
