#include "hullstate/linear_model.hpp"

#include <Eigen/QR>

namespace hullstate {

double reciprocal_linearization_error(Complex v) {
    return std::abs(1.0 / v - linearize_reciprocal(v));
}

LinearModel build_linear_model(const Network& net, const MeasurementSet& ms) {
    LinearModel model;
    model.bus_count = net.bus_count();
    const int nbus = net.bus_count();

    // pair P/Q rows by location, keyed to reject unpaired halves
    struct PendingPair {
        bool has_p = false, has_q = false;
        double p = 0.0, q = 0.0, sigma_p = 0.0, sigma_q = 0.0;
        int order = 0;
    };
    std::map<std::pair<int, int>, PendingPair> flows;  // (metered bus, branch)
    std::map<int, PendingPair> injections;             // bus
    int order = 0;

    for (const Measurement& m : ms.items) {
        switch (m.kind) {
            case MeasurementKind::Vmag: {
                ScalarRow row;
                row.column = m.bus;  // V_r column of the bus
                row.rhs = m.noisy_value;
                row.sigma = m.sigma;
                model.scalar_rows.push_back(row);
                break;
            }
            case MeasurementKind::Pflow:
            case MeasurementKind::Qflow: {
                PendingPair& pair = flows[{m.bus, m.branch}];
                if (pair.order == 0) pair.order = ++order;
                if (m.kind == MeasurementKind::Pflow) {
                    pair.has_p = true;
                    pair.p = m.noisy_value;
                    pair.sigma_p = m.sigma;
                } else {
                    pair.has_q = true;
                    pair.q = m.noisy_value;
                    pair.sigma_q = m.sigma;
                }
                break;
            }
            case MeasurementKind::Pinj:
            case MeasurementKind::Qinj: {
                PendingPair& pair = injections[m.bus];
                if (pair.order == 0) pair.order = ++order;
                if (m.kind == MeasurementKind::Pinj) {
                    pair.has_p = true;
                    pair.p = m.noisy_value;
                    pair.sigma_p = m.sigma;
                } else {
                    pair.has_q = true;
                    pair.q = m.noisy_value;
                    pair.sigma_q = m.sigma;
                }
                break;
            }
        }
    }

    std::vector<std::pair<int, ComplexRow>> ordered_rows;
    for (const auto& [key, pair] : flows) {
        if (!pair.has_p || !pair.has_q)
            raise(ErrorCode::UnpairedPQ, "flow measurement at branch lacks its P/Q partner");
        const auto [metered, branch_idx] = key;
        const Branch& br = net.branches()[static_cast<std::size_t>(branch_idx)];
        const int other = br.from == metered ? br.to : br.from;
        const Complex s(pair.p, pair.q);
        const Complex y_conj = std::conj(br.admittance_pu);
        ComplexRow row;
        row.v_coeffs[metered] = s;
        row.conj_coeffs[metered] += y_conj;
        row.conj_coeffs[other] -= y_conj;
        row.rhs = 2.0 * s;
        row.measured_bus = metered;
        row.sigma_p = pair.sigma_p;
        row.sigma_q = pair.sigma_q;
        ordered_rows.emplace_back(pair.order, std::move(row));
    }
    for (const auto& [bus, pair] : injections) {
        if (!pair.has_p || !pair.has_q)
            raise(ErrorCode::UnpairedPQ, "injection measurement at bus " + net.bus(bus).id +
                                             " lacks its P/Q partner");
        const Complex s(pair.p, pair.q);
        ComplexRow row;
        row.v_coeffs[bus] = s;
        Complex y_sum(0, 0);
        for (const Network::Neighbor& nb : net.neighbors(bus)) {
            const Complex y_conj =
                std::conj(net.branches()[static_cast<std::size_t>(nb.branch)].admittance_pu);
            row.conj_coeffs[nb.bus] -= y_conj;
            y_sum += y_conj;
        }
        row.conj_coeffs[bus] += y_sum;
        row.rhs = 2.0 * s;
        row.measured_bus = bus;
        row.sigma_p = pair.sigma_p;
        row.sigma_q = pair.sigma_q;
        ordered_rows.emplace_back(pair.order, std::move(row));
    }
    std::sort(ordered_rows.begin(), ordered_rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [ord, row] : ordered_rows) model.complex_rows.push_back(std::move(row));

    // exact reference rows: V_slack = 1 + j0
    const int slack = net.slack_index();
    model.scalar_rows.push_back({slack, 1.0, 0.0});
    model.scalar_rows.push_back({slack + nbus, 0.0, 0.0});
    return model;
}

RealSystem to_rectangular(const LinearModel& model) {
    RealSystem sys;
    to_rectangular(model, sys);
    return sys;
}

void to_rectangular(const LinearModel& model, RealSystem& sys) {
    const int nbus = model.bus_count;
    const int n = 2 * nbus;
    const int nc = static_cast<int>(model.complex_rows.size());
    const int m = 2 * nc + static_cast<int>(model.scalar_rows.size());
    if (m < n)
        raise(ErrorCode::InsufficientRedundancy,
              "linear model has " + std::to_string(m) + " rows for " + std::to_string(n) +
                  " states");

    sys.factored = false;
    sys.A.resize(m, n);
    sys.A.setZero();
    sys.b.resize(m);
    sys.b.setZero();
    sys.perturbations.resize(static_cast<std::size_t>(m));
    for (RowPerturbation& p : sys.perturbations) {
        p.coefficients.clear();
        p.rhs_halfwidth = 0.0;
    }

    for (int i = 0; i < nc; ++i) {
        const ComplexRow& row = model.complex_rows[static_cast<std::size_t>(i)];
        const int re_row = i;
        const int im_row = i + nc;
        // B_k V_k: real row gets (B_r, -B_x), imaginary row gets (B_x, B_r)
        for (const auto& [k, c] : row.v_coeffs) {
            sys.A(re_row, k) += c.real();
            sys.A(re_row, k + nbus) += -c.imag();
            sys.A(im_row, k) += c.imag();
            sys.A(im_row, k + nbus) += c.real();
        }
        // D_k V_k^*: real row gets (D_r, D_x), imaginary row gets (D_x, -D_r)
        for (const auto& [k, c] : row.conj_coeffs) {
            sys.A(re_row, k) += c.real();
            sys.A(re_row, k + nbus) += c.imag();
            sys.A(im_row, k) += c.imag();
            sys.A(im_row, k + nbus) += -c.real();
        }
        sys.b(re_row) = row.rhs.real();
        sys.b(im_row) = row.rhs.imag();

        // 3-sigma half-widths: P sits in the V_r coefficient of the real row
        // and the V_x coefficient of the imaginary row (Q likewise shifted);
        // the rhs 2S doubles them.
        const int mb = row.measured_bus;
        RowPerturbation& re_pert = sys.perturbations[static_cast<std::size_t>(re_row)];
        re_pert.coefficients.push_back({mb, 3.0 * row.sigma_p});
        re_pert.coefficients.push_back({mb + nbus, 3.0 * row.sigma_q});
        re_pert.rhs_halfwidth = 6.0 * row.sigma_p;
        RowPerturbation& im_pert = sys.perturbations[static_cast<std::size_t>(im_row)];
        im_pert.coefficients.push_back({mb, 3.0 * row.sigma_q});
        im_pert.coefficients.push_back({mb + nbus, 3.0 * row.sigma_p});
        im_pert.rhs_halfwidth = 6.0 * row.sigma_q;
    }

    int r = 2 * nc;
    for (const ScalarRow& row : model.scalar_rows) {
        sys.A(r, row.column) = 1.0;
        sys.b(r) = row.rhs;
        sys.perturbations[static_cast<std::size_t>(r)].rhs_halfwidth = 3.0 * row.sigma;
        ++r;
    }

    if (!sys.A.allFinite() || !sys.b.allFinite())
        raise(ErrorCode::InvalidArgument, "non-finite entries in the linear model");

    // rank gate: A^T A is positive definite iff rank A = n. Accumulated over
    // the sparse rows; each model row touches only a handful of columns.
    thread_local Eigen::MatrixXd normal;
    normal.resize(n, n);
    normal.setZero();
    std::vector<int> cols;
    for (int row = 0; row < m; ++row) {
        cols.clear();
        for (int c = 0; c < n; ++c)
            if (sys.A(row, c) != 0.0) cols.push_back(c);
        for (const int ci : cols) {
            const double v = sys.A(row, ci);
            for (const int cj : cols) normal(ci, cj) += v * sys.A(row, cj);
        }
    }
    sys.normal_factor.compute(normal);
    if (sys.normal_factor.info() != Eigen::Success)
        raise(ErrorCode::RankDeficient,
              "A^T A is not positive definite: placement unobservable");
    sys.factored = true;
}

IntervalSystem relax_to_intervals(const RealSystem& sys) {
    const std::size_t m = static_cast<std::size_t>(sys.A.rows());
    const std::size_t n = static_cast<std::size_t>(sys.A.cols());
    IntervalSystem ivs{IntervalMatrix(m, n), IntervalVector(m)};
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            const double v = sys.A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
            if (v != 0.0) ivs.A.set(r, c, Interval::point(v));
        }
        const RowPerturbation& pert = sys.perturbations[r];
        for (const RowPerturbation::Entry& e : pert.coefficients) {
            const std::size_t c = static_cast<std::size_t>(e.column);
            const Interval cur = ivs.A.at(r, c);
            ivs.A.set(r, c, Interval(cur.lo() - e.halfwidth, cur.hi() + e.halfwidth));
        }
        ivs.b.set(r, Interval::symmetric(sys.b(static_cast<Eigen::Index>(r)),
                                         pert.rhs_halfwidth));
    }
    return ivs;
}

}  // namespace hullstate
