#pragma once

#include <map>
#include <memory>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "hullstate/interval.hpp"
#include "hullstate/measurement.hpp"
#include "hullstate/network.hpp"

namespace hullstate {

/// First-order reciprocal approximation around V = 1: 1/V ~= 2 - V.
inline Complex linearize_reciprocal(Complex v) { return 2.0 - v; }

/// Approximation loss F(V) = |1/V - (2 - V)|; equals |1-V|^2 / |V| exactly.
double reciprocal_linearization_error(Complex v);

/// One complex measurement equation sum_k B_k V_k + sum_k D_k V_k^* = E.
/// Flow pair (P,Q) at branch i-k measured at i:
///     S V_i + y* V_i^* - y* V_k^* = 2 S
/// Injection pair at bus k (injection positive into the network):
///     S V_k + (sum_l y*_lk) V_k^* - sum_l y*_lk V_l^* = 2 S
/// The measured S = P + jQ appears in one V coefficient and in the
/// right-hand side; the admittance coefficients are exact.
struct ComplexRow {
    std::map<int, Complex> v_coeffs;     // B: coefficients on V_k
    std::map<int, Complex> conj_coeffs;  // D: coefficients on V_k^*
    Complex rhs;                         // E
    int measured_bus = -1;               // column whose V coefficient carries S
    double sigma_p = 0.0, sigma_q = 0.0;
};

/// Real scalar row: one unit coefficient, used for |V_k| ~= V_{k,r}
/// (sigma > 0) and for the two exact slack reference rows (sigma == 0).
struct ScalarRow {
    int column = 0;  // into the stacked [V_r; V_x] ordering
    double rhs = 0.0;
    double sigma = 0.0;
};

struct LinearModel {
    std::vector<ComplexRow> complex_rows;
    std::vector<ScalarRow> scalar_rows;
    int bus_count = 0;
};

/// Builds the linearized model from paired P/Q measurements plus magnitude
/// and slack rows. Throws UnpairedPQ when a location has P without Q.
LinearModel build_linear_model(const Network& net, const MeasurementSet& ms);

/// Where the +-3 sigma relaxation lands in one real row: half-widths on
/// specific coefficients and on the right-hand side.
struct RowPerturbation {
    struct Entry {
        int column;
        double halfwidth;
    };
    std::vector<Entry> coefficients;
    double rhs_halfwidth = 0.0;
};

/// Ax = b with columns ordered all V_r by bus, then all V_x. Row order:
/// real parts of the complex rows, their imaginary parts, then scalar rows.
struct RealSystem {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    std::vector<RowPerturbation> perturbations;  // row provenance, one per row

    // Cholesky factor of A^T A: the rank gate, reused by the enclosure
    // solver as its midpoint inverse.
    Eigen::LLT<Eigen::MatrixXd> normal_factor;
    bool factored = false;
};

/// Stacks the complex rows into real form and verifies rank A = n via the
/// Cholesky of A^T A (RankDeficient otherwise: the placement is unobservable).
/// The into-form reuses the output's storage across repeated solves.
RealSystem to_rectangular(const LinearModel& model);
void to_rectangular(const LinearModel& model, RealSystem& out);

struct IntervalSystem {
    IntervalMatrix A;
    IntervalVector b;
};

/// Superposes the +-3 sigma maximum errors onto every occurrence of a
/// measured value, in the coefficients of A as well as in b; admittance
/// entries and slack rows stay degenerate.
IntervalSystem relax_to_intervals(const RealSystem& sys);

}  // namespace hullstate
