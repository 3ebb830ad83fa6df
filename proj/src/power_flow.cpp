#include "hullstate/power_flow.hpp"

#include <Eigen/Dense>

namespace hullstate {

namespace {

// Out-flowing current at each bus: I_k = sum_l y_kl (V_k - V_l).
std::vector<Complex> out_currents(const Network& net, const StateVector& x) {
    std::vector<Complex> current(static_cast<std::size_t>(net.bus_count()), Complex(0, 0));
    for (const Branch& br : net.branches()) {
        const Complex flow = br.admittance_pu * (x.voltage(br.from) - x.voltage(br.to));
        current[static_cast<std::size_t>(br.from)] += flow;
        current[static_cast<std::size_t>(br.to)] -= flow;
    }
    return current;
}

}  // namespace

Complex branch_flow(const Network& net, const StateVector& x, int i, int k) {
    const Complex y = net.branch_admittance(i, k);
    return x.voltage(i) * std::conj(y * (x.voltage(i) - x.voltage(k)));
}

Complex bus_injection(const Network& net, const StateVector& x, int k) {
    if (k < 0 || k >= net.bus_count())
        raise(ErrorCode::UnknownElement, "bus index out of range");
    Complex acc(0, 0);
    for (const Network::Neighbor& nb : net.neighbors(k)) {
        const Complex y = net.branches()[static_cast<std::size_t>(nb.branch)].admittance_pu;
        acc += std::conj(y * (x.voltage(k) - x.voltage(nb.bus)));
    }
    return x.voltage(k) * acc;
}

PowerFlowSolution solve_power_flow(const Network& net, const PowerFlowOptions& opts) {
    if (opts.tolerance <= 0.0)
        raise(ErrorCode::InvalidArgument, "power flow tolerance must be positive");
    const int nbus = net.bus_count();
    const int slack = net.slack_index();

    std::vector<int> unknown;  // non-slack bus indices
    unknown.reserve(static_cast<std::size_t>(nbus - 1));
    for (int i = 0; i < nbus; ++i)
        if (i != slack) unknown.push_back(i);
    const int n = static_cast<int>(unknown.size());

    PowerFlowSolution sol;
    sol.states = StateVector::flat(nbus);

    Eigen::MatrixXd jac(2 * n, 2 * n);
    Eigen::VectorXd mismatch(2 * n);

    for (int it = 1; it <= opts.max_iterations; ++it) {
        sol.iterations = it;
        const std::vector<Complex> current = out_currents(net, sol.states);

        double worst = 0.0;
        for (int a = 0; a < n; ++a) {
            const int k = unknown[static_cast<std::size_t>(a)];
            const Complex injected =
                sol.states.voltage(k) * std::conj(current[static_cast<std::size_t>(k)]);
            const Complex residual = net.net_injection_pu(k) - injected;
            mismatch(a) = residual.real();
            mismatch(a + n) = residual.imag();
            worst = std::max(worst, std::max(std::abs(residual.real()),
                                             std::abs(residual.imag())));
        }
        if (worst < opts.tolerance) {
            sol.converged = true;
            break;
        }
        if (it == opts.max_iterations)
            raise(ErrorCode::NonConvergence,
                  "power flow stalled at mismatch " + std::to_string(worst));

        // dS_k/dV_m in rectangular coordinates, S_k = V_k conj(I_k)
        jac.setZero();
        for (int a = 0; a < n; ++a) {
            const int k = unknown[static_cast<std::size_t>(a)];
            const Complex iconj = std::conj(current[static_cast<std::size_t>(k)]);
            const Complex vk = sol.states.voltage(k);

            auto add_partials = [&](int m, Complex y_km, bool self) {
                // I_k partial wrt V_m: y_km for m == k summed over neighbors,
                // -y_km for an adjacent m (encoded in y_km's sign by caller)
                const Complex d_re = (self ? iconj : Complex(0, 0)) + vk * std::conj(y_km);
                const Complex d_im =
                    Complex(0, 1) * ((self ? iconj : Complex(0, 0)) - vk * std::conj(y_km));
                // locate column of bus m
                const int b = m > slack ? m - 1 : m;
                jac(a, b) += d_re.real();
                jac(a, b + n) += d_im.real();
                jac(a + n, b) += d_re.imag();
                jac(a + n, b + n) += d_im.imag();
            };

            Complex y_self(0, 0);
            for (const Network::Neighbor& nb : net.neighbors(k)) {
                const Complex y =
                    net.branches()[static_cast<std::size_t>(nb.branch)].admittance_pu;
                y_self += y;
                if (nb.bus != slack) add_partials(nb.bus, -y, false);
            }
            add_partials(k, y_self, true);
        }

        Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
        const Eigen::VectorXd step = lu.solve(mismatch);
        if (!step.allFinite())
            raise(ErrorCode::SingularMatrix, "singular power flow Jacobian");
        for (int a = 0; a < n; ++a) {
            const int k = unknown[static_cast<std::size_t>(a)];
            sol.states.set_voltage(k, sol.states.voltage(k) + Complex(step(a), step(a + n)));
        }
    }

    sol.branch_flows.reserve(net.branches().size());
    for (const Branch& br : net.branches())
        sol.branch_flows.push_back(branch_flow(net, sol.states, br.from, br.to));
    sol.injections.reserve(static_cast<std::size_t>(nbus));
    for (int k = 0; k < nbus; ++k) sol.injections.push_back(bus_injection(net, sol.states, k));
    return sol;
}

}  // namespace hullstate
