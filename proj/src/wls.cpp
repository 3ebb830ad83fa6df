#include "hullstate/wls.hpp"

namespace hullstate {

namespace {

// Column of a non-slack bus in the reduced state ordering.
inline int column_of(int bus, int slack) { return bus > slack ? bus - 1 : bus; }

struct RowWriter {
    Eigen::MatrixXd& jac;
    int row;
    int slack;
    int n;  // non-slack bus count

    void add(int bus, Complex d_re, Complex d_im, bool real_part) {
        if (bus == slack) return;
        const int col = column_of(bus, slack);
        if (real_part) {
            jac(row, col) += d_re.real();
            jac(row, col + n) += d_im.real();
        } else {
            jac(row, col) += d_re.imag();
            jac(row, col + n) += d_im.imag();
        }
    }
};

}  // namespace

Eigen::VectorXd h_eval(const Network& net, const StateVector& x, const MeasurementSet& ms) {
    Eigen::VectorXd h(static_cast<Eigen::Index>(ms.size()));
    for (std::size_t r = 0; r < ms.size(); ++r) {
        const Measurement& m = ms.items[r];
        switch (m.kind) {
            case MeasurementKind::Vmag:
                h(static_cast<Eigen::Index>(r)) = std::abs(x.voltage(m.bus));
                break;
            case MeasurementKind::Pflow:
            case MeasurementKind::Qflow: {
                const Branch& br = net.branches()[static_cast<std::size_t>(m.branch)];
                const int from = m.bus;
                const int to = br.from == from ? br.to : br.from;
                const Complex s = branch_flow(net, x, from, to);
                h(static_cast<Eigen::Index>(r)) =
                    m.kind == MeasurementKind::Pflow ? s.real() : s.imag();
                break;
            }
            case MeasurementKind::Pinj:
            case MeasurementKind::Qinj: {
                const Complex s = bus_injection(net, x, m.bus);
                h(static_cast<Eigen::Index>(r)) =
                    m.kind == MeasurementKind::Pinj ? s.real() : s.imag();
                break;
            }
        }
    }
    return h;
}

Eigen::MatrixXd jacobian(const Network& net, const StateVector& x, const MeasurementSet& ms) {
    const int slack = net.slack_index();
    const int n = net.bus_count() - 1;
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ms.size()), 2 * n);

    for (std::size_t r = 0; r < ms.size(); ++r) {
        const Measurement& m = ms.items[r];
        RowWriter w{jac, static_cast<int>(r), slack, n};
        switch (m.kind) {
            case MeasurementKind::Vmag: {
                const Complex v = x.voltage(m.bus);
                const double mag = std::abs(v);
                if (mag == 0.0)
                    raise(ErrorCode::InvalidArgument, "voltage magnitude gradient at zero");
                w.add(m.bus, Complex(v.real() / mag, 0), Complex(v.imag() / mag, 0), true);
                break;
            }
            case MeasurementKind::Pflow:
            case MeasurementKind::Qflow: {
                const Branch& br = net.branches()[static_cast<std::size_t>(m.branch)];
                const int i = m.bus;
                const int k = br.from == i ? br.to : br.from;
                const Complex y = br.admittance_pu;
                const Complex drop_conj = std::conj(y * (x.voltage(i) - x.voltage(k)));
                const Complex vi = x.voltage(i);
                // S_ik = V_i conj(y (V_i - V_k))
                const Complex d_re_i = drop_conj + vi * std::conj(y);
                const Complex d_im_i = Complex(0, 1) * (drop_conj - vi * std::conj(y));
                const Complex d_re_k = -vi * std::conj(y);
                const Complex d_im_k = Complex(0, 1) * (vi * std::conj(y));
                const bool real_part = m.kind == MeasurementKind::Pflow;
                w.add(i, d_re_i, d_im_i, real_part);
                w.add(k, d_re_k, d_im_k, real_part);
                break;
            }
            case MeasurementKind::Pinj:
            case MeasurementKind::Qinj: {
                const int k = m.bus;
                const Complex vk = x.voltage(k);
                Complex out_current(0, 0);
                Complex y_self(0, 0);
                for (const Network::Neighbor& nb : net.neighbors(k)) {
                    const Complex y =
                        net.branches()[static_cast<std::size_t>(nb.branch)].admittance_pu;
                    out_current += y * (vk - x.voltage(nb.bus));
                    y_self += y;
                }
                const Complex iconj = std::conj(out_current);
                const bool real_part = m.kind == MeasurementKind::Pinj;
                // S_k = V_k conj(I_k), I_k = sum y (V_k - V_l)
                w.add(k, iconj + vk * std::conj(y_self),
                      Complex(0, 1) * (iconj - vk * std::conj(y_self)), real_part);
                for (const Network::Neighbor& nb : net.neighbors(k)) {
                    const Complex y =
                        net.branches()[static_cast<std::size_t>(nb.branch)].admittance_pu;
                    w.add(nb.bus, -vk * std::conj(y), Complex(0, 1) * (vk * std::conj(y)),
                          real_part);
                }
                break;
            }
        }
    }
    return jac;
}

WlsProblem WlsProblem::standard(const Network& net, const MeasurementSet& ms) {
    WlsProblem p;
    p.net = &net;
    p.measurements = &ms;
    p.weights.resize(static_cast<Eigen::Index>(ms.size()));
    for (std::size_t r = 0; r < ms.size(); ++r) {
        const double sigma = ms.items[r].sigma;
        if (sigma <= 0.0) raise(ErrorCode::InvalidArgument, "nonpositive sigma in weights");
        p.weights(static_cast<Eigen::Index>(r)) = 1.0 / (sigma * sigma);
    }
    p.start = StateVector::flat(net.bus_count());
    return p;
}

WlsResult gauss_newton(const WlsProblem& problem, const WlsOptions& opts) {
    const Network& net = *problem.net;
    const MeasurementSet& ms = *problem.measurements;
    const int slack = net.slack_index();
    const int n = net.bus_count() - 1;
    if (static_cast<int>(ms.size()) < 2 * n)
        raise(ErrorCode::InsufficientRedundancy, "fewer measurement rows than unknowns");

    Eigen::VectorXd z(static_cast<Eigen::Index>(ms.size()));
    for (std::size_t r = 0; r < ms.size(); ++r)
        z(static_cast<Eigen::Index>(r)) = ms.items[r].noisy_value;

    WlsResult result;
    result.state = problem.start;

    const auto objective = [&](const StateVector& state) {
        const Eigen::VectorXd residual = z - h_eval(net, state, ms);
        return residual.dot(problem.weights.cwiseProduct(residual));
    };

    double current_objective = objective(result.state);
    result.objective_trace.push_back(current_objective);
    for (int it = 1; it <= opts.max_iterations; ++it) {
        result.iterations = it;
        const Eigen::VectorXd residual = z - h_eval(net, result.state, ms);
        const Eigen::MatrixXd jac = jacobian(net, result.state, ms);
        const Eigen::MatrixXd weighted = problem.weights.asDiagonal() * jac;
        const Eigen::MatrixXd gain = jac.transpose() * weighted;
        const Eigen::VectorXd gradient = weighted.transpose() * residual;

        Eigen::LDLT<Eigen::MatrixXd> ldlt(gain);
        const Eigen::VectorXd pivots = ldlt.vectorD().cwiseAbs();
        if (ldlt.info() != Eigen::Success ||
            pivots.minCoeff() <= 1e-14 * pivots.maxCoeff())
            raise(ErrorCode::SingularMatrix, "rank-deficient gain matrix: placement unobservable");
        Eigen::VectorXd step = ldlt.solve(gradient);
        if (!step.allFinite())
            raise(ErrorCode::SingularMatrix, "singular gain matrix: placement unobservable");

        double scale = 1.0;
        StateVector next = result.state;
        for (int attempt = 0;; ++attempt) {
            next = result.state;
            for (int k = 0, a = 0; k < net.bus_count(); ++k) {
                if (k == slack) continue;
                next.set_voltage(k, next.voltage(k) +
                                        scale * Complex(step(a), step(a + n)));
                ++a;
            }
            const double next_objective = objective(next);
            if (!opts.step_halving || next_objective <= current_objective ||
                attempt >= 20) {
                current_objective = next_objective;
                break;
            }
            scale *= 0.5;
        }
        result.state = next;
        result.objective_trace.push_back(current_objective);

        const double step_norm = scale * step.cwiseAbs().maxCoeff();
        result.step_norms.push_back(step_norm);
        if (step_norm < opts.tolerance) {
            result.converged = true;
            break;
        }
    }
    if (!result.converged)
        raise(ErrorCode::NonConvergence,
              "Gauss-Newton did not reach tolerance in " +
                  std::to_string(opts.max_iterations) + " iterations");
    result.objective = current_objective;
    return result;
}

WlsResult gauss_newton(const Network& net, const MeasurementSet& ms, const WlsOptions& opts) {
    return gauss_newton(WlsProblem::standard(net, ms), opts);
}

}  // namespace hullstate
