#pragma once

#include <Eigen/Dense>

#include "hullstate/linear_model.hpp"
#include "hullstate/power_flow.hpp"

namespace hullstate {

/// Square augmented interval system
///     [[A, -I], [0, A^T]] [x; y] = [b; 0]
/// whose midpoint solution is the unweighted least-squares solution of
/// Ax = b with residual y = Ax - b (A^T y = 0 are the normal equations).
struct AugmentedSystem {
    IntervalMatrix matrix;  // (m+n) x (n+m)
    IntervalVector rhs;     // m+n
    int state_count = 0;    // n: leading solution entries
    int residual_count = 0; // m: trailing dummy entries
};

AugmentedSystem augment(const IntervalSystem& sys);

/// Preconditioning data for the enclosure iteration with C = Mid(matrix)^{-1}:
/// K = I - C*matrix then has zero midpoint, so it is carried as the plain
/// radius matrix |C| * Rad(matrix). cb = C*rhs, beta = ||K||_inf (< 1 or
/// ContractionFailure), alpha = ||cb||_inf / (1 - beta), x0 = [-alpha, alpha]^d.
///
/// C and the radius are stored in the blocks induced by the augmented split
/// (x rows/cols first); block products keep the per-solve allocations small.
struct Preconditioner {
    int state_count = 0;     // n
    int residual_count = 0;  // m (0 for a system without the augmented shape)

    Eigen::MatrixXd c00, c01, c10, c11;  // C = [[c00 n x m, c01 n x n],
                                         //      [c10 m x m, c11 m x n]]
    Eigen::MatrixXd r00, r01, r10, r11;  // radius = [[r00 n x n, r01 n x m],
                                         //           [r10 m x n, r11 m x m]]
    IntervalVector cb;
    double beta = 0.0;
    double alpha = 0.0;
    IntervalVector x0;

    Eigen::MatrixXd dense_C() const;
    Eigen::MatrixXd dense_radius() const;
};

/// Generic entry point: splits the interval matrix into midpoint and radius,
/// inverts the midpoint (by block elimination when it has the augmented
/// shape, dense LU otherwise). Throws SingularMatrix / ContractionFailure.
Preconditioner krawczyk_init(const AugmentedSystem& sys);

/// Fast path used by estimate(): builds the same preconditioner straight
/// from the real system and its perturbation half-widths, reusing the
/// cached Cholesky factor of A^T A. Agrees with the generic route
/// entrywise (property-tested). The into-form reuses the output's storage.
Preconditioner krawczyk_init(const RealSystem& sys);
void krawczyk_init(const RealSystem& sys, Preconditioner& out);

struct KrawczykOptions {
    double epsilon = 1e-4;   // stop when the iterate moves less than this
    int max_iterations = 200;
};

struct Enclosure {
    IntervalVector hull;  // length n+m: states then dummy residuals
    int iterations = 0;
    double beta = 0.0;
};

/// Iterates X <- (cb + K X) intersect X from x0 until the Hausdorff distance
/// between iterates drops to epsilon. K X is the canonical interval matvec;
/// with the zero-midpoint K it reduces to [-r, r] with r = radius*mag(X).
/// Nested by construction; throws EmptyIntersection on inconsistency and
/// IterationCap on stagnation.
Enclosure krawczyk_solve(const Preconditioner& pre, const KrawczykOptions& opts = {});

struct IntervalEstimate {
    StateVector state;    // midpoints of the leading 2*n_bus hull entries
    Enclosure enclosure;
    double redundancy = 0.0;
    double build_solve_ms = 0.0;  // wall clock around build -> solve
};

/// Reusable buffers for repeated estimates (Monte Carlo seeds, timing
/// repeats): keeps the solver's matrices allocated across calls.
struct EstimateScratch {
    RealSystem system;
    Preconditioner preconditioner;
};

/// Full pipeline: linear model, rectangular stacking, 3-sigma relaxation,
/// augmentation, preconditioning, enclosure iteration, midpoint extraction.
IntervalEstimate estimate(const Network& net, const MeasurementSet& ms,
                          const KrawczykOptions& opts = {});
IntervalEstimate estimate(const Network& net, const MeasurementSet& ms,
                          const KrawczykOptions& opts, EstimateScratch& scratch);

}  // namespace hullstate
