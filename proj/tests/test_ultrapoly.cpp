#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qk/errors.hpp"
#include "qk/ultrapoly.hpp"

#include <cmath>
#include <vector>

using namespace qk;

namespace {

WeightSequence factorial(int p_max = 256) { return make_sequence(SequenceSpec::factorial(p_max)); }

UltrapolyParams desk(J0Mode mode = J0Mode::relaxed)
{
    UltrapolyParams p;
    p.mode = mode;
    p.H = 2.0;
    return p;
}

double angle_gap(double a, double b) { return std::abs(wrap_angle(a - b)); }

}  // namespace

TEST_CASE("constants of the factorial desk case")
{
    const auto P = Ultrapolynomial::build(factorial(), desk());
    CHECK(P.H() == 2.0);
    // A finite table fits H slightly below the limiting value 2.
    auto fitted = desk();
    fitted.H.reset();
    const auto F = Ultrapolynomial::build(factorial(), fitted);
    CHECK(F.H() > 1.95);
    CHECK(F.H() <= 2.0);
    CHECK(F.j0() == 23);
    CHECK(P.l() == doctest::Approx(4.0 * std::sqrt(2.0)).epsilon(1e-14));
    CHECK(P.j0() == 23);
    CHECK(P.zero_free_halfwidth() == doctest::Approx(2.875).epsilon(1e-14));

    const auto S = Ultrapolynomial::build(factorial(2048), desk(J0Mode::strict));
    CHECK(S.j0() == 1449);
    try {
        Ultrapolynomial::build(factorial(256), desk(J0Mode::strict));
        FAIL("strict j0 should not fit in 256 terms");
    } catch (const InvalidArgument& e) {
        CHECK(std::string(e.what()).find("1449") != std::string::npos);
    }
}

TEST_CASE("rejections")
{
    auto p = desk();
    p.q = 1;
    CHECK_THROWS_AS(Ultrapolynomial::build(factorial(), p), InvalidArgument);
    p = desk();
    p.d = 2;
    CHECK_THROWS_AS(Ultrapolynomial::build(factorial(), p), InvalidArgument);
    p = desk();
    p.rprime = 0.5;
    CHECK_THROWS_AS(Ultrapolynomial::build(factorial(), p), InvalidArgument);
    // (M.5) fails for gevrey sigma = 0.2 with q = 2: sum 1/j^{0.4} diverges.
    CHECK_THROWS_AS(Ultrapolynomial::build(make_sequence(SequenceSpec::gevrey(0.2)), desk()), InvalidArgument);
    CHECK_THROWS_AS(Ultrapolynomial::build(make_sequence(SequenceSpec::custom({1, 1, 2, 6, 24, 120})), desk()),
                    InvalidArgument);
}

TEST_CASE("infinite product with unit scaling")
{
    auto p = desk();
    p.l_override = 1.0;
    p.j0_override = 1;
    const auto P = Ultrapolynomial::build(factorial(), p);
    CHECK(P.evaluate({1.0, 0.0}).real() == doctest::Approx(2.1673606258822620).epsilon(1e-14));
    CHECK(P.log_abs_real(3.0) == doctest::Approx(7.45566775052530645).epsilon(1e-14));
    CHECK(P.log_abs_real(0.0) == 0.0);
}

TEST_CASE("values against mpmath sums")
{
    const auto P = Ultrapolynomial::build(factorial(), desk());
    CHECK(P.log_abs_real(10.0) == doctest::Approx(78.233937448826044).epsilon(1e-14));
    CHECK(P.log_abs_real(-100.0) == doctest::Approx(2133.0596505372787).epsilon(1e-14));
    const auto v = P.log_evaluate({3.0, 1.5});
    CHECK(v.log_abs == doctest::Approx(-0.66735727288453286).epsilon(1e-13));
    CHECK(angle_gap(v.arg, 3.7817131807470465) < 1e-12);
    CHECK(P.evaluate({0.0, 0.0}) == cplx{1.0, 0.0});
}

TEST_CASE("symmetries and truncation independence")
{
    const auto P = Ultrapolynomial::build(factorial(), desk());
    for (cplx z : {cplx{1.3, 0.4}, cplx{-7.0, 2.0}, cplx{30.0, -3.9}, cplx{200.0, 1.0}}) {
        const auto a = P.log_evaluate(z);
        const auto c = P.log_evaluate(std::conj(z));
        CHECK(a.log_abs == doctest::Approx(c.log_abs).epsilon(1e-13));
        CHECK(angle_gap(a.arg, -c.arg) < 1e-10);
        const auto m = P.log_evaluate(-z);
        CHECK(a.log_abs == doctest::Approx(m.log_abs).epsilon(1e-13));
        CHECK(angle_gap(a.arg, m.arg) < 1e-10);

        const int J = P.truncation(std::abs(z));
        const auto far = P.log_evaluate(z, J + 64);
        CHECK(std::abs(far.log_abs - a.log_abs) <= 1e-12 * std::max(1.0, std::abs(a.log_abs)));
        CHECK(angle_gap(far.arg, a.arg) < 1e-10);
        CHECK_THROWS_AS(P.log_evaluate(z, J - 1), InvalidArgument);
    }
    CHECK_THROWS_AS(P.log_evaluate({5000.0, 0.0}), OutOfBox);
    CHECK(P.tail_bound(100.0) < 1e-18);
}

TEST_CASE("strip check on the desk case")
{
    const auto P = Ultrapolynomial::build(factorial(), desk());
    StripGrid g;
    g.x_max = 50.0;
    const auto r = strip_check(P, g);
    CHECK(r.min_abs_real == 1.0);
    CHECK(r.argmin_real == 0.0);
    CHECK(r.c_prime > 0.0);
    CHECK(std::isfinite(r.c_prime));
    CHECK(r.strip_reduced);
    CHECK(r.y_max == 4.0);
    // rho_32 = 4 sqrt 2 puts a zero at 4 + 4i on the boundary line of the strip.
    bool found = false;
    for (cplx z : r.zeros_in_window)
        found = found || std::abs(z - cplx{4.0, 4.0}) < 1e-12;
    CHECK(found);
    CHECK(P.log_evaluate({4.0, 4.0}).log_abs < -25.0);
    CHECK(r.rows.size() == 1001);
}

TEST_CASE("derivatives of 1/P")
{
    const auto P = Ultrapolynomial::build(factorial(), desk());
    CHECK(std::abs(inv_derivative(P, 0.0, 1, 1.0).value) < 1e-13);
    CHECK(inv_derivative(P, 0.0, 0, 1.0).value == doctest::Approx(1.0).epsilon(1e-12));
    // 1/P = 1 - x^4 sum rho_j^{-4} + O(x^8)
    CHECK(inv_derivative(P, 0.0, 4, 2.0).value == doctest::Approx(-0.71847884373505306).epsilon(1e-9));
    CHECK(inv_derivative(P, 6.0, 0, 1.0).value == doctest::Approx(std::exp(-P.log_abs_real(6.0))).epsilon(1e-10));
    for (double x : {0.0, 2.5, 10.0})
        for (int n : {0, 3, 10, 20}) {
            const auto d = inv_derivative(P, x, n, 2.0);
            CHECK(std::isfinite(d.bound_ratio));
        }
    CHECK_THROWS_AS(inv_derivative(P, 0.0, 41, 1.0), InvalidArgument);
    CHECK_THROWS_AS(inv_derivative(P, 0.0, 2, 3.0), InvalidArgument);
}

TEST_CASE("multiplier application")
{
    const auto m = Multiplier::from(Ultrapolynomial::build(factorial(), desk()));
    const std::vector<double> xs = {-1.0, 0.0, 0.3, 2.0};
    const auto c = multiplier_apply(m, TestFunction::cosine(pi), xs);
    for (std::size_t i = 0; i < xs.size(); ++i)
        CHECK(c[i] == doctest::Approx(std::exp(m.log_symbol(pi)) * std::cos(pi * xs[i])).epsilon(1e-14));

    // P(D) exp(-x^2) = (1/pi) int_0^inf P(xi) sqrt(pi) e^{-xi^2/4} cos(x xi) dxi
    const auto g = multiplier_apply(m, TestFunction::gaussian(0, 1), xs);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double x = xs[i];
        const double ref = integrate(
            [&](double xi) { return std::exp(m.log_symbol(xi) - xi * xi / 4.0) * std::cos(x * xi); }, 0.0, 120.0,
            1e-13) / std::sqrt(pi);
        CHECK(g[i] == doctest::Approx(ref).epsilon(1e-9));
    }

    const auto id = multiplier_apply(Multiplier::identity(), TestFunction::gaussian(0, 1), xs);
    CHECK(id[2] == std::exp(-0.09));
    CHECK_THROWS_AS(multiplier_apply(m, TestFunction::expgrow(1.0), xs), InvalidArgument);
}
