#include "hullstate/krawczyk.hpp"

#include <chrono>

namespace hullstate {

AugmentedSystem augment(const IntervalSystem& sys) {
    const std::size_t m = sys.A.rows();
    const std::size_t n = sys.A.cols();
    AugmentedSystem aug;
    aug.state_count = static_cast<int>(n);
    aug.residual_count = static_cast<int>(m);
    aug.matrix = IntervalMatrix(m + n, n + m);
    aug.rhs = IntervalVector(m + n);
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            const Interval v = sys.A.at(r, c);
            aug.matrix.set(r, c, v);            // A block
            aug.matrix.set(m + c, n + r, v);    // A^T block
        }
        aug.matrix.set(r, n + r, Interval::point(-1.0));  // -I block
        aug.rhs.set(r, sys.b[r]);
    }
    return aug;
}

Eigen::MatrixXd Preconditioner::dense_C() const {
    const Eigen::Index n = state_count, m = residual_count;
    Eigen::MatrixXd out(n + m, m + n);
    out.block(0, 0, n, m) = c00;
    out.block(0, m, n, n) = c01;
    out.block(n, 0, m, m) = c10;
    out.block(n, m, m, n) = c11;
    return out;
}

Eigen::MatrixXd Preconditioner::dense_radius() const {
    const Eigen::Index n = state_count, m = residual_count;
    Eigen::MatrixXd out(n + m, n + m);
    out.block(0, 0, n, n) = r00;
    out.block(0, n, n, m) = r01;
    out.block(n, 0, m, n) = r10;
    out.block(n, n, m, m) = r11;
    return out;
}

namespace {

struct SparseEntry {
    int row, col;
    double value;
};

// Shared tail of the init paths once the blocks of C are in place: radius
// blocks from the entry half-widths (in full matrix coordinates), cb from
// the full rhs, then beta, alpha and the initial box.
void finish_preconditioner(Preconditioner& pre, const std::vector<SparseEntry>& widths,
                           const Eigen::VectorXd& rhs_mid, const Eigen::VectorXd& rhs_rad) {
    const Eigen::Index n = pre.state_count, m = pre.residual_count;
    if (!pre.c00.allFinite() || !pre.c01.allFinite() || !pre.c10.allFinite() ||
        !pre.c11.allFinite())
        raise(ErrorCode::SingularMatrix, "midpoint matrix is not invertible");

    pre.r00 = Eigen::MatrixXd::Zero(n, n);
    pre.r01 = Eigen::MatrixXd::Zero(n, m);
    pre.r10 = Eigen::MatrixXd::Zero(m, n);
    pre.r11 = Eigen::MatrixXd::Zero(m, m);
    for (const SparseEntry& e : widths) {
        if (e.value == 0.0) continue;
        const bool left = e.row < m;   // which column block of C
        const bool top = e.col < n;    // which column block of the radius
        if (left && top) {
            pre.r00.col(e.col).noalias() += pre.c00.col(e.row).cwiseAbs() * e.value;
            pre.r10.col(e.col).noalias() += pre.c10.col(e.row).cwiseAbs() * e.value;
        } else if (left) {
            pre.r01.col(e.col - n).noalias() += pre.c00.col(e.row).cwiseAbs() * e.value;
            pre.r11.col(e.col - n).noalias() += pre.c10.col(e.row).cwiseAbs() * e.value;
        } else if (top) {
            pre.r00.col(e.col).noalias() += pre.c01.col(e.row - m).cwiseAbs() * e.value;
            pre.r10.col(e.col).noalias() += pre.c11.col(e.row - m).cwiseAbs() * e.value;
        } else {
            pre.r01.col(e.col - n).noalias() += pre.c01.col(e.row - m).cwiseAbs() * e.value;
            pre.r11.col(e.col - n).noalias() += pre.c11.col(e.row - m).cwiseAbs() * e.value;
        }
    }

    double beta = 0.0;
    if (n > 0) {
        Eigen::VectorXd row_sum = pre.r00.rowwise().sum();
        if (m > 0) row_sum += pre.r01.rowwise().sum();
        beta = row_sum.maxCoeff();
    }
    if (m > 0) {
        Eigen::VectorXd row_sum = pre.r11.rowwise().sum();
        if (n > 0) row_sum += pre.r10.rowwise().sum();
        beta = std::max(beta, row_sum.maxCoeff());
    }
    pre.beta = beta;

    Eigen::VectorXd cb_mid(n + m), cb_rad(n + m);
    cb_mid.head(n) = pre.c00 * rhs_mid.head(m) + pre.c01 * rhs_mid.tail(n);
    cb_rad.head(n) = pre.c00.cwiseAbs() * rhs_rad.head(m) + pre.c01.cwiseAbs() * rhs_rad.tail(n);
    cb_mid.tail(m) = pre.c10 * rhs_mid.head(m) + pre.c11 * rhs_mid.tail(n);
    cb_rad.tail(m) = pre.c10.cwiseAbs() * rhs_rad.head(m) + pre.c11.cwiseAbs() * rhs_rad.tail(n);

    pre.cb = IntervalVector(static_cast<std::size_t>(n + m));
    double cb_norm = 0.0;
    for (Eigen::Index i = 0; i < n + m; ++i) {
        pre.cb.set(static_cast<std::size_t>(i), Interval::symmetric(cb_mid(i), cb_rad(i)));
        cb_norm = std::max(cb_norm, std::abs(cb_mid(i)) + cb_rad(i));
    }

    if (!(pre.beta < 1.0))
        raise(ErrorCode::ContractionFailure,
              "||I - C A||_inf = " + std::to_string(pre.beta) +
                  " >= 1: intervals too wide or system ill-conditioned");

    pre.alpha = cb_norm / (1.0 - pre.beta);
    pre.x0 = IntervalVector(static_cast<std::size_t>(n + m));
    for (std::size_t i = 0; i < static_cast<std::size_t>(n + m); ++i)
        pre.x0.set(i, Interval(-pre.alpha, pre.alpha));
}

// C blocks for the augmented shape from the Cholesky factor of A^T A:
// C = [[G A^T, G], [A G A^T - I, A G]]. The sparse entry list of A drives
// the off-diagonal products.
void build_block_inverse(Preconditioner& pre, const Eigen::LLT<Eigen::MatrixXd>& llt,
                         const std::vector<SparseEntry>& a_entries) {
    const Eigen::Index n = pre.state_count, m = pre.residual_count;
    pre.c01.resize(n, n);
    pre.c01 = llt.solve(Eigen::MatrixXd::Identity(n, n));
    pre.c00.resize(n, m);
    pre.c00.setZero();
    for (const SparseEntry& e : a_entries)
        pre.c00.col(e.row).noalias() += pre.c01.col(e.col) * e.value;

    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    thread_local RowMajor c00_rows, q;
    c00_rows = pre.c00;
    q.resize(m, m);   // A G A^T
    q.setZero();
    for (const SparseEntry& e : a_entries)
        q.row(e.row).noalias() += c00_rows.row(e.col) * e.value;
    pre.c10 = q;
    pre.c10.diagonal().array() -= 1.0;
    pre.c11 = pre.c00.transpose();  // A G, G symmetric
}

// Half-width entries of the augmented matrix: each A-block width mirrors
// into the A^T block.
void mirror_widths(std::vector<SparseEntry>& widths, Eigen::Index m, Eigen::Index n) {
    const std::size_t count = widths.size();
    widths.reserve(2 * count);
    for (std::size_t i = 0; i < count; ++i)
        widths.push_back({static_cast<int>(m + widths[i].col),
                          static_cast<int>(n + widths[i].row), widths[i].value});
}

}  // namespace

Preconditioner krawczyk_init(const RealSystem& sys) {
    Preconditioner pre;
    krawczyk_init(sys, pre);
    return pre;
}

void krawczyk_init(const RealSystem& sys, Preconditioner& pre) {
    if (!sys.factored)
        raise(ErrorCode::InvalidArgument, "real system lacks its normal-equation factor");
    const Eigen::Index m = sys.A.rows();
    const Eigen::Index n = sys.A.cols();

    thread_local std::vector<SparseEntry> a_entries;
    a_entries.clear();
    for (Eigen::Index r = 0; r < m; ++r)
        for (Eigen::Index c = 0; c < n; ++c)
            if (const double v = sys.A(r, c); v != 0.0)
                a_entries.push_back({static_cast<int>(r), static_cast<int>(c), v});

    pre.state_count = static_cast<int>(n);
    pre.residual_count = static_cast<int>(m);
    build_block_inverse(pre, sys.normal_factor, a_entries);

    thread_local std::vector<SparseEntry> widths;
    widths.clear();
    Eigen::VectorXd rhs_mid = Eigen::VectorXd::Zero(m + n);
    Eigen::VectorXd rhs_rad = Eigen::VectorXd::Zero(m + n);
    for (Eigen::Index r = 0; r < m; ++r) {
        const RowPerturbation& pert = sys.perturbations[static_cast<std::size_t>(r)];
        for (const RowPerturbation::Entry& e : pert.coefficients)
            if (e.halfwidth != 0.0)
                widths.push_back({static_cast<int>(r), e.column, e.halfwidth});
        rhs_mid(r) = sys.b(r);
        rhs_rad(r) = pert.rhs_halfwidth;
    }
    mirror_widths(widths, m, n);
    finish_preconditioner(pre, widths, rhs_mid, rhs_rad);
}

Preconditioner krawczyk_init(const AugmentedSystem& sys) {
    const std::size_t size = sys.matrix.rows();
    if (size != sys.matrix.cols() || size != sys.rhs.size())
        raise(ErrorCode::DimensionMismatch, "augmented system is not square");
    const Eigen::Index sz = static_cast<Eigen::Index>(size);

    Eigen::MatrixXd mid(sz, sz);
    for (Eigen::Index r = 0; r < sz; ++r) {
        const double* lo = sys.matrix.row_lower(static_cast<std::size_t>(r));
        const double* hi = sys.matrix.row_upper(static_cast<std::size_t>(r));
        for (Eigen::Index c = 0; c < sz; ++c) mid(r, c) = 0.5 * (lo[c] + hi[c]);
    }
    Eigen::VectorXd rhs_mid(sz), rhs_rad(sz);
    for (std::size_t i = 0; i < size; ++i) {
        rhs_mid(static_cast<Eigen::Index>(i)) = midpoint(sys.rhs[i]);
        rhs_rad(static_cast<Eigen::Index>(i)) = radius(sys.rhs[i]);
    }

    const Eigen::Index n = sys.state_count;
    const Eigen::Index m = sys.residual_count;
    const bool augmented_shape =
        n > 0 && m > 0 && sz == n + m && mid.block(m, 0, n, n).isZero(0.0) &&
        (mid.block(0, n, m, m) + Eigen::MatrixXd::Identity(m, m)).isZero(0.0) &&
        mid.block(m, n, n, m).isApprox(mid.block(0, 0, m, n).transpose(), 0.0);

    if (augmented_shape) {
        const Eigen::MatrixXd a = mid.block(0, 0, m, n);
        Eigen::LLT<Eigen::MatrixXd> llt(a.transpose() * a);
        if (llt.info() == Eigen::Success) {
            std::vector<SparseEntry> a_entries, widths;
            for (std::size_t r = 0; r < static_cast<std::size_t>(m); ++r) {
                const double* lo = sys.matrix.row_lower(r);
                const double* hi = sys.matrix.row_upper(r);
                for (Eigen::Index c = 0; c < n; ++c) {
                    const double v = 0.5 * (lo[c] + hi[c]);
                    if (v != 0.0)
                        a_entries.push_back({static_cast<int>(r), static_cast<int>(c), v});
                    const double rad = 0.5 * (hi[c] - lo[c]);
                    if (rad != 0.0)
                        widths.push_back({static_cast<int>(r), static_cast<int>(c), rad});
                }
            }
            Preconditioner pre;
            pre.state_count = static_cast<int>(n);
            pre.residual_count = static_cast<int>(m);
            build_block_inverse(pre, llt, a_entries);
            mirror_widths(widths, m, n);
            finish_preconditioner(pre, widths, rhs_mid, rhs_rad);
            return pre;
        }
    }

    // General square system: one monolithic block. With state_count = 0 the
    // whole vector lives in the residual half, keeping the input ordering.
    Preconditioner pre;
    pre.state_count = 0;
    pre.residual_count = static_cast<int>(size);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(mid);
    pre.c10 = lu.inverse();
    pre.c00 = Eigen::MatrixXd::Zero(0, sz);
    pre.c01 = Eigen::MatrixXd::Zero(0, 0);
    pre.c11 = Eigen::MatrixXd::Zero(sz, 0);
    std::vector<SparseEntry> widths;
    for (std::size_t r = 0; r < size; ++r) {
        const double* lo = sys.matrix.row_lower(r);
        const double* hi = sys.matrix.row_upper(r);
        for (Eigen::Index c = 0; c < sz; ++c) {
            const double rad = 0.5 * (hi[c] - lo[c]);
            if (rad != 0.0)
                widths.push_back({static_cast<int>(r), static_cast<int>(c), rad});
        }
    }
    finish_preconditioner(pre, widths, rhs_mid, rhs_rad);
    return pre;
}

Enclosure krawczyk_solve(const Preconditioner& pre, const KrawczykOptions& opts) {
    Enclosure enc;
    enc.beta = pre.beta;
    const Eigen::Index n = pre.state_count, m = pre.residual_count;
    const std::size_t size = static_cast<std::size_t>(n + m);

    IntervalVector x = pre.x0;
    Eigen::VectorXd mag(static_cast<Eigen::Index>(size)), rho(static_cast<Eigen::Index>(size));
    for (int it = 1; it <= opts.max_iterations; ++it) {
        enc.iterations = it;
        for (std::size_t i = 0; i < size; ++i)
            mag(static_cast<Eigen::Index>(i)) = magnitude(x[i]);
        if (n > 0) rho.head(n).noalias() = pre.r00 * mag.head(n);
        if (n > 0 && m > 0) rho.head(n).noalias() += pre.r01 * mag.tail(m);
        if (m > 0) {
            rho.tail(m).noalias() = pre.r11 * mag.tail(m);
            if (n > 0) rho.tail(m).noalias() += pre.r10 * mag.head(n);
        }

        // image = cb + [-rho, rho], then clip into the current iterate
        double moved = 0.0;
        IntervalVector next(size);
        for (std::size_t i = 0; i < size; ++i) {
            const Interval image(pre.cb[i].lo() - rho(static_cast<Eigen::Index>(i)),
                                 pre.cb[i].hi() + rho(static_cast<Eigen::Index>(i)));
            const Interval clipped = intersect(image, x[i]);
            moved = std::max(moved, std::abs(clipped.lo() - x[i].lo()));
            moved = std::max(moved, std::abs(clipped.hi() - x[i].hi()));
            next.set(i, clipped);
        }
        if (!subset_of(next, x))
            raise(ErrorCode::EmptyIntersection, "internal: enclosure iterate not nested");
        x = std::move(next);
        if (moved <= opts.epsilon) {
            enc.hull = std::move(x);
            return enc;
        }
    }
    raise(ErrorCode::IterationCap,
          "enclosure iteration still moving after " + std::to_string(opts.max_iterations) +
              " steps");
}

IntervalEstimate estimate(const Network& net, const MeasurementSet& ms,
                          const KrawczykOptions& opts) {
    EstimateScratch scratch;
    return estimate(net, ms, opts, scratch);
}

IntervalEstimate estimate(const Network& net, const MeasurementSet& ms,
                          const KrawczykOptions& opts, EstimateScratch& scratch) {
    const auto started = std::chrono::steady_clock::now();

    const LinearModel model = build_linear_model(net, ms);
    to_rectangular(model, scratch.system);
    krawczyk_init(scratch.system, scratch.preconditioner);
    Enclosure enclosure = krawczyk_solve(scratch.preconditioner, opts);

    const auto finished = std::chrono::steady_clock::now();

    IntervalEstimate est;
    const int nbus = net.bus_count();
    est.state = StateVector(nbus);
    for (int k = 0; k < nbus; ++k) {
        const double vr = midpoint(enclosure.hull[static_cast<std::size_t>(k)]);
        const double vx = midpoint(enclosure.hull[static_cast<std::size_t>(k + nbus)]);
        est.state.set_voltage(k, Complex(vr, vx));
    }
    est.enclosure = std::move(enclosure);
    est.redundancy = redundancy(ms, net);
    est.build_solve_ms =
        std::chrono::duration<double, std::milli>(finished - started).count();
    return est;
}

}  // namespace hullstate
