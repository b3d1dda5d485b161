#pragma once

// Small numeric helpers shared across modules: compensated summation for the
// identity checks (whose tolerances are far below what naive accumulation of
// n^r terms guarantees) and a fixed-width float formatter so that emitted
// JSON/CSV is byte-identical across platforms and worker counts.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace monostat {

// Neumaier variant of Kahan summation.
class Kahan {
  public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    void add(const Kahan& o) {
        add(o.sum_);
        add(o.comp_);
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Dense row-major matrix; plain data, no algebra beyond what callers need.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

    double& at(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    double at(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }
};

// 12 significant digits, shortest form (%.12g): enough to round-trip the
// statistics we report while keeping files readable and deterministic.
inline std::string format_double(double x) {
    if (x == 0.0) x = 0.0;  // normalise -0
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

inline double sq(double x) { return x * x; }

}  // namespace monostat
