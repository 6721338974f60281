#pragma once

#include <boost/multiprecision/float128.hpp>

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

namespace qk {

using cplx = std::complex<double>;
using quad = boost::multiprecision::float128;

inline constexpr double pi = std::numbers::pi;
inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

// A nonzero complex number stored as (log|z|, arg z); zero has log_abs = -inf.
// Products of thousands of factors stay representable this way.
struct LogComplex {
    double log_abs = 0.0;
    double arg = 0.0;

    static LogComplex from(cplx z);
    cplx value() const;
    bool is_zero() const { return log_abs == neg_inf; }

    LogComplex& operator*=(const LogComplex& o);
    friend LogComplex operator*(LogComplex a, const LogComplex& b) { return a *= b; }
    LogComplex inverse() const { return {-log_abs, -arg}; }
};

// log(1 + u) without cancellation for small |u|.
cplx log1p(cplx u);

// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

double log_factorial(int n);

// Z(s, a) = a^s * zeta(s, a) = sum_{n>=0} (1 + n/a)^{-s}, for s > 1, a >= 1.
double hurwitz_scaled(double s, double a);

// Least-squares line y = slope * x + intercept.
struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms_residual = 0.0;
    double max_abs_residual = 0.0;
};

LinearFit fit_line(std::span<const double> x, std::span<const double> y);

// Adaptive Gauss-Kronrod on a finite interval.
double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-12,
                 double* abs_error = nullptr);

struct LineIntegral {
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    int expansions = 0;
};

struct LineIntegralOptions {
    double rel_tol = 1e-12;
    double abs_tol = 1e-300;
    int max_expansions = 48;
    // Number of consecutive growing shells after which the integral is declared divergent.
    int divergence_streak = 3;
};

// Integral of f over the real line. Starts on [lo, hi] and doubles the box until the
// outer shells stop contributing. Throws Divergence when shell contributions keep
// growing, NotConverged when the expansion budget runs out.
LineIntegral integrate_line(const std::function<double(double)>& f, double lo, double hi,
                            const LineIntegralOptions& opts = {});

}  // namespace qk
