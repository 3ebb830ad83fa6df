#include "hullstate/interval.hpp"

namespace hullstate {

namespace {

// One interval product accumulated onto [acc_lo, acc_hi]. Branchless
// four-product form so the matvec inner loop vectorizes.
inline void accumulate_product(double alo, double ahi, double blo, double bhi,
                               double& acc_lo, double& acc_hi) {
    const double p1 = alo * blo;
    const double p2 = alo * bhi;
    const double p3 = ahi * blo;
    const double p4 = ahi * bhi;
    acc_lo += std::min(std::min(p1, p2), std::min(p3, p4));
    acc_hi += std::max(std::max(p1, p2), std::max(p3, p4));
}

}  // namespace

IntervalVector operator*(const IntervalMatrix& m, const IntervalVector& v) {
    if (m.cols() != v.size())
        raise(ErrorCode::DimensionMismatch, "interval matvec dimension mismatch");
    const std::size_t rows = m.rows(), cols = m.cols();
    IntervalVector out(rows);
    const double* vlo = v.lower().data();
    const double* vhi = v.upper().data();
    for (std::size_t r = 0; r < rows; ++r) {
        const double* mlo = m.row_lower(r);
        const double* mhi = m.row_upper(r);
        double acc_lo = 0.0, acc_hi = 0.0;
        for (std::size_t c = 0; c < cols; ++c)
            accumulate_product(mlo[c], mhi[c], vlo[c], vhi[c], acc_lo, acc_hi);
        out.set(r, Interval(acc_lo, acc_hi));
    }
    return out;
}

IntervalMatrix operator*(const IntervalMatrix& a, const IntervalMatrix& b) {
    if (a.cols() != b.rows())
        raise(ErrorCode::DimensionMismatch, "interval matmul dimension mismatch");
    IntervalMatrix out(a.rows(), b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < b.cols(); ++c) {
            double acc_lo = 0.0, acc_hi = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) {
                const Interval x = a.at(r, k);
                const Interval y = b.at(k, c);
                accumulate_product(x.lo(), x.hi(), y.lo(), y.hi(), acc_lo, acc_hi);
            }
            out.set(r, c, Interval(acc_lo, acc_hi));
        }
    }
    return out;
}

double inf_norm(const IntervalVector& v) {
    double best = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) best = std::max(best, magnitude(v[i]));
    return best;
}

double inf_norm(const IntervalMatrix& m) {
    double best = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        double row_sum = 0.0;
        const double* lo = m.row_lower(r);
        const double* hi = m.row_upper(r);
        for (std::size_t c = 0; c < m.cols(); ++c)
            row_sum += std::max(std::abs(lo[c]), std::abs(hi[c]));
        best = std::max(best, row_sum);
    }
    return best;
}

double hausdorff_distance(const IntervalVector& a, const IntervalVector& b) {
    if (a.size() != b.size())
        raise(ErrorCode::DimensionMismatch, "interval distance dimension mismatch");
    double best = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        best = std::max(best, std::abs(a[i].lo() - b[i].lo()));
        best = std::max(best, std::abs(a[i].hi() - b[i].hi()));
    }
    return best;
}

IntervalVector intersect(const IntervalVector& a, const IntervalVector& b) {
    if (a.size() != b.size())
        raise(ErrorCode::DimensionMismatch, "interval intersection dimension mismatch");
    IntervalVector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out.set(i, intersect(a[i], b[i]));
    return out;
}

bool subset_of(const IntervalVector& a, const IntervalVector& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!subset_of(a[i], b[i])) return false;
    return true;
}

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid_argument";
        case ErrorCode::DuplicateBusId: return "duplicate_bus_id";
        case ErrorCode::NoSlackBus: return "no_slack_bus";
        case ErrorCode::DisconnectedGraph: return "disconnected_graph";
        case ErrorCode::NonRadialTopology: return "non_radial_topology";
        case ErrorCode::UnitMissing: return "unit_missing";
        case ErrorCode::ZeroImpedance: return "zero_impedance";
        case ErrorCode::UnknownElement: return "unknown_element";
        case ErrorCode::UnpairedPQ: return "unpaired_pq";
        case ErrorCode::InsufficientRedundancy: return "insufficient_redundancy";
        case ErrorCode::DimensionMismatch: return "dimension_mismatch";
        case ErrorCode::EmptyIntersection: return "empty_intersection";
        case ErrorCode::SingularMatrix: return "singular_matrix";
        case ErrorCode::RankDeficient: return "rank_deficient";
        case ErrorCode::ContractionFailure: return "contraction_failure";
        case ErrorCode::NonConvergence: return "non_convergence";
        case ErrorCode::IterationCap: return "iteration_cap";
        case ErrorCode::IoFailure: return "io_failure";
    }
    return "unknown";
}

}  // namespace hullstate
