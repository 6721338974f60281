#include "qk/numerics.hpp"

#include "qk/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <cassert>
#include <sstream>

namespace qk {

const char* to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::out_of_box: return "out-of-box";
    case ErrorCode::divergence: return "divergence";
    case ErrorCode::not_converged: return "not-converged";
    case ErrorCode::inconsistent: return "inconsistent";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::config_error: return "config-error";
    }
    return "unknown";
}

LogComplex LogComplex::from(cplx z)
{
    if (z == cplx{0.0, 0.0})
        return {neg_inf, 0.0};
    return {std::log(std::abs(z)), std::arg(z)};
}

cplx LogComplex::value() const
{
    if (is_zero())
        return {0.0, 0.0};
    return std::polar(std::exp(log_abs), arg);
}

LogComplex& LogComplex::operator*=(const LogComplex& o)
{
    log_abs += o.log_abs;
    arg = wrap_angle(arg + o.arg);
    return *this;
}

double wrap_angle(double a)
{
    if (a > -pi && a <= pi)
        return a;
    a = std::remainder(a, 2.0 * pi);
    if (a <= -pi)
        a += 2.0 * pi;
    return a;
}

cplx log1p(cplx u)
{
    const double re = u.real();
    const double im = u.imag();
    // |1+u|^2 = 1 + 2 re + |u|^2
    const double log_abs = 0.5 * std::log1p(2.0 * re + re * re + im * im);
    return {log_abs, std::atan2(im, 1.0 + re)};
}

double log_factorial(int n)
{
    return std::lgamma(static_cast<double>(n) + 1.0);
}

double hurwitz_scaled(double s, double a)
{
    if (!(s > 1.0) || !(a >= 1.0))
        throw InvalidArgument("hurwitz_scaled requires s > 1 and a >= 1");
    constexpr int direct_terms = 64;
    double sum = 0.0;
    for (int n = 0; n < direct_terms; ++n) {
        const double term = std::exp(-s * std::log1p(n / a));
        sum += term;
        if (term < 1e-20 * sum)
            return sum;
    }
    // Euler-Maclaurin for the remainder starting at n = direct_terms.
    static constexpr std::array<double, 7> bernoulli = {1.0 / 6.0,    -1.0 / 30.0, 1.0 / 42.0,    -1.0 / 30.0,
                                                        5.0 / 66.0,   -691.0 / 2730.0, 7.0 / 6.0};
    const double base = 1.0 + direct_terms / a;
    const double g = std::exp(-s * std::log(base));
    sum += a / (s - 1.0) * g * base + 0.5 * g;
    double rising = s;       // (s)_{2i-1}
    double factorial = 2.0;  // (2i)!
    double a_pow = 1.0 / a;  // a^{-(2i-1)}
    double base_pow = g / base;
    for (std::size_t i = 0; i < bernoulli.size(); ++i) {
        sum += bernoulli[i] / factorial * rising * a_pow * base_pow;
        const double m = 2.0 * static_cast<double>(i) + 1.0;
        rising *= (s + m) * (s + m + 1.0);
        factorial *= (m + 2.0) * (m + 3.0);
        a_pow /= a * a;
        base_pow /= base * base;
    }
    return sum;
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y)
{
    assert(x.size() == y.size());
    const auto n = static_cast<double>(x.size());
    if (x.size() < 2)
        throw InvalidArgument("fit_line needs at least two points");
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LinearFit fit;
    fit.slope = sxx > 0 ? sxy / sxx : 0.0;
    fit.intercept = my - fit.slope * mx;
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.slope * x[i] + fit.intercept);
        ss += r * r;
        fit.max_abs_residual = std::max(fit.max_abs_residual, std::abs(r));
    }
    fit.rms_residual = std::sqrt(ss / n);
    return fit;
}

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol, double* abs_error)
{
    if (a == b)
        return 0.0;
    double err = 0.0;
    const double value =
        boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, rel_tol, &err);
    if (abs_error)
        *abs_error = err;
    return value;
}

LineIntegral integrate_line(const std::function<double(double)>& f, double lo, double hi,
                            const LineIntegralOptions& opts)
{
    if (!(hi > lo))
        throw InvalidArgument("integrate_line: empty initial interval");
    LineIntegral out;
    out.lo = lo;
    out.hi = hi;
    out.value = integrate(f, lo, hi, opts.rel_tol);
    if (!std::isfinite(out.value))
        throw Divergence("integrand not finite on the initial interval");

    double width = hi - lo;
    double prev_shell = std::numeric_limits<double>::infinity();
    int growth_streak = 0;
    for (int k = 1; k <= opts.max_expansions; ++k) {
        const double new_lo = out.lo - width;
        const double new_hi = out.hi + width;
        const double shell = integrate(f, new_lo, out.lo, opts.rel_tol) + integrate(f, out.hi, new_hi, opts.rel_tol);
        out.lo = new_lo;
        out.hi = new_hi;
        out.expansions = k;
        width *= 2.0;
        if (!std::isfinite(shell))
            throw Divergence("integrand overflows while expanding the integration box");
        out.value += shell;
        const double mag = std::abs(shell);
        if (mag <= std::max(opts.abs_tol, opts.rel_tol * std::abs(out.value)) && k >= 2)
            return out;
        if (mag > 1.1 * prev_shell) {
            if (++growth_streak >= opts.divergence_streak) {
                std::ostringstream os;
                os << "integral diverges: shell contributions grew on " << growth_streak
                   << " consecutive box doublings (box [" << out.lo << ", " << out.hi << "])";
                throw Divergence(os.str());
            }
        } else {
            growth_streak = 0;
        }
        prev_shell = mag;
    }
    std::ostringstream os;
    os << "integral did not settle after " << opts.max_expansions << " box doublings";
    throw NotConverged(os.str());
}

}  // namespace qk
