#pragma once

#include <vector>

#include "hullstate/network.hpp"

namespace hullstate {

/// Rectangular bus voltages for every bus, stacked as x = [V_r; V_x].
/// The slack entry is the phase reference and stays at (1, 0).
class StateVector {
public:
    StateVector() = default;
    explicit StateVector(int bus_count)
        : vr_(static_cast<std::size_t>(bus_count), 1.0),
          vx_(static_cast<std::size_t>(bus_count), 0.0) {}

    static StateVector flat(int bus_count) { return StateVector(bus_count); }

    int bus_count() const { return static_cast<int>(vr_.size()); }
    Complex voltage(int bus) const {
        return {vr_[static_cast<std::size_t>(bus)], vx_[static_cast<std::size_t>(bus)]};
    }
    void set_voltage(int bus, Complex v) {
        vr_[static_cast<std::size_t>(bus)] = v.real();
        vx_[static_cast<std::size_t>(bus)] = v.imag();
    }
    double real_part(int bus) const { return vr_[static_cast<std::size_t>(bus)]; }
    double imag_part(int bus) const { return vx_[static_cast<std::size_t>(bus)]; }

private:
    std::vector<double> vr_, vx_;
};

struct PowerFlowSolution {
    StateVector states;
    std::vector<Complex> branch_flows;  // S_ik at the branch's from side
    std::vector<Complex> injections;    // per bus, positive into the network
    bool converged = false;
    int iterations = 0;
};

struct PowerFlowOptions {
    double tolerance = 1e-10;  // per-bus power mismatch, p.u.
    int max_iterations = 30;
};

/// Newton-Raphson in rectangular coordinates on the PQ mismatch equations.
/// Throws NonConvergence when the iteration cap is reached.
PowerFlowSolution solve_power_flow(const Network& net, const PowerFlowOptions& opts = {});

/// S_ik = V_i * conj(y_ik (V_i - V_k)) for adjacent buses i, k.
Complex branch_flow(const Network& net, const StateVector& x, int i, int k);

/// S_k = V_k * sum_l conj(y_lk (V_k - V_l)): net power the bus feeds into
/// the network, so a pure load bus reports the negated load.
Complex bus_injection(const Network& net, const StateVector& x, int k);

}  // namespace hullstate
