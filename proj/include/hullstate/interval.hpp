#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "hullstate/errors.hpp"

namespace hullstate {

/// Closed real interval [lo, hi] with plain Moore arithmetic.
///
/// No directed rounding: the tolerances of the enclosure solver (1e-4) dwarf
/// double-precision rounding at this problem scale, so endpoints are computed
/// in the default rounding mode. Division is intentionally absent; nothing in
/// the estimation pipeline inverts an interval.
class Interval {
public:
    Interval() : lo_(0.0), hi_(0.0) {}
    Interval(double lo, double hi) : lo_(lo), hi_(hi) {
        if (!(lo <= hi))
            raise(ErrorCode::InvalidArgument, "interval bounds out of order");
    }

    static Interval point(double x) { return Interval(x, x); }
    /// [mid - rad, mid + rad], rad >= 0.
    static Interval symmetric(double mid, double rad) {
        if (rad < 0.0) raise(ErrorCode::InvalidArgument, "negative interval radius");
        return Interval(mid - rad, mid + rad);
    }

    double lo() const { return lo_; }
    double hi() const { return hi_; }

    bool operator==(const Interval& o) const { return lo_ == o.lo_ && hi_ == o.hi_; }

private:
    double lo_, hi_;
};

inline Interval operator+(Interval a, Interval b) {
    return Interval(a.lo() + b.lo(), a.hi() + b.hi());
}

inline Interval operator-(Interval a) { return Interval(-a.hi(), -a.lo()); }

inline Interval operator-(Interval a, Interval b) { return a + (-b); }

inline Interval operator*(Interval a, Interval b) {
    const double p1 = a.lo() * b.lo();
    const double p2 = a.lo() * b.hi();
    const double p3 = a.hi() * b.lo();
    const double p4 = a.hi() * b.hi();
    const double lo = std::min(std::min(p1, p2), std::min(p3, p4));
    const double hi = std::max(std::max(p1, p2), std::max(p3, p4));
    return Interval(lo, hi);
}

inline double midpoint(Interval a) { return 0.5 * (a.lo() + a.hi()); }
inline double radius(Interval a) { return 0.5 * (a.hi() - a.lo()); }
/// max |x| over x in a.
inline double magnitude(Interval a) { return std::max(std::abs(a.lo()), std::abs(a.hi())); }
inline bool contains(Interval a, double x) { return a.lo() <= x && x <= a.hi(); }
inline bool subset_of(Interval a, Interval b) { return b.lo() <= a.lo() && a.hi() <= b.hi(); }

/// Throws EmptyIntersection when the intervals are disjoint; a disjoint
/// intersection inside the enclosure iteration means the measurements are
/// inconsistent with the model.
inline Interval intersect(Interval a, Interval b) {
    const double lo = std::max(a.lo(), b.lo());
    const double hi = std::min(a.hi(), b.hi());
    if (lo > hi) raise(ErrorCode::EmptyIntersection, "disjoint intervals");
    return Interval(lo, hi);
}

/// Fixed-length vector of intervals. Stored as separate lo/hi planes so the
/// solver's matrix-vector kernels stream contiguous doubles.
class IntervalVector {
public:
    IntervalVector() = default;
    explicit IntervalVector(std::size_t n) : lo_(n, 0.0), hi_(n, 0.0) {}
    IntervalVector(std::initializer_list<Interval> elems) {
        lo_.reserve(elems.size());
        hi_.reserve(elems.size());
        for (const Interval& e : elems) {
            lo_.push_back(e.lo());
            hi_.push_back(e.hi());
        }
    }

    std::size_t size() const { return lo_.size(); }
    Interval operator[](std::size_t i) const { return Interval(lo_[i], hi_[i]); }
    void set(std::size_t i, Interval v) {
        lo_[i] = v.lo();
        hi_[i] = v.hi();
    }

    const std::vector<double>& lower() const { return lo_; }
    const std::vector<double>& upper() const { return hi_; }

private:
    std::vector<double> lo_, hi_;
};

/// Dense row-major interval matrix.
class IntervalMatrix {
public:
    IntervalMatrix() : rows_(0), cols_(0) {}
    IntervalMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), lo_(rows * cols, 0.0), hi_(rows * cols, 0.0) {}

    static IntervalMatrix identity(std::size_t n) {
        IntervalMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m.set(i, i, Interval::point(1.0));
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    Interval at(std::size_t r, std::size_t c) const {
        const std::size_t k = r * cols_ + c;
        return Interval(lo_[k], hi_[k]);
    }
    void set(std::size_t r, std::size_t c, Interval v) {
        const std::size_t k = r * cols_ + c;
        lo_[k] = v.lo();
        hi_[k] = v.hi();
    }

    const double* row_lower(std::size_t r) const { return lo_.data() + r * cols_; }
    const double* row_upper(std::size_t r) const { return hi_.data() + r * cols_; }

private:
    std::size_t rows_, cols_;
    std::vector<double> lo_, hi_;
};

IntervalVector operator*(const IntervalMatrix& m, const IntervalVector& v);
IntervalMatrix operator*(const IntervalMatrix& a, const IntervalMatrix& b);

/// max over elements of max(|lo|, |hi|).
double inf_norm(const IntervalVector& v);
/// max row sum of entry magnitudes; the norm used for the contraction factor.
double inf_norm(const IntervalMatrix& m);
/// Hausdorff distance on endpoints: max_i max(|a.lo-b.lo|, |a.hi-b.hi|).
double hausdorff_distance(const IntervalVector& a, const IntervalVector& b);
/// Elementwise intersection; throws EmptyIntersection on any disjoint pair.
IntervalVector intersect(const IntervalVector& a, const IntervalVector& b);
bool subset_of(const IntervalVector& a, const IntervalVector& b);

}  // namespace hullstate
