#pragma once

#include <Eigen/Dense>

#include "hullstate/measurement.hpp"
#include "hullstate/network.hpp"
#include "hullstate/power_flow.hpp"

namespace hullstate {

/// Nonlinear WLS estimation problem: z = h(x) + e, W = R^{-1} diagonal.
/// Slack states are eliminated, so the unknown count is 2*(n_bus - 1).
struct WlsProblem {
    const Network* net = nullptr;
    const MeasurementSet* measurements = nullptr;
    Eigen::VectorXd weights;  // 1/sigma^2 per row, measurement order
    StateVector start;        // flat start by default

    static WlsProblem standard(const Network& net, const MeasurementSet& ms);
};

struct WlsOptions {
    double tolerance = 1e-6;  // stop when ||dx||_inf < tolerance
    int max_iterations = 50;
    bool step_halving = true;  // engage only when the objective increases
};

struct WlsResult {
    StateVector state;
    int iterations = 0;
    bool converged = false;
    double objective = 0.0;
    std::vector<double> step_norms;       // ||dx||_inf per iteration
    std::vector<double> objective_trace;  // J after each accepted step
};

/// Exact nonlinear measurement function h(x) in measurement order.
Eigen::VectorXd h_eval(const Network& net, const StateVector& x, const MeasurementSet& ms);

/// Analytic Jacobian dh/dx, m x 2*(n_bus-1); slack columns are omitted.
/// Column order: non-slack V_r in bus order, then non-slack V_x.
Eigen::MatrixXd jacobian(const Network& net, const StateVector& x, const MeasurementSet& ms);

/// Gauss-Newton on the normal equations (H^T W H) dx = H^T W (z - h(x)).
WlsResult gauss_newton(const WlsProblem& problem, const WlsOptions& opts = {});
WlsResult gauss_newton(const Network& net, const MeasurementSet& ms, const WlsOptions& opts = {});

}  // namespace hullstate
