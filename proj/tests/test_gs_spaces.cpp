#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qk/errors.hpp"
#include "qk/gs_spaces.hpp"

#include <cmath>

using namespace qk;
using TF = TestFunction;

namespace {

const WeightSequence& fact()
{
    static const WeightSequence m = make_sequence(SequenceSpec::factorial(256));
    return m;
}

}  // namespace

TEST_CASE("seminorm of a gaussian")
{
    const auto s = seminorm(TF::gaussian(0, 1), fact(), fact(), SeminormWeight::beurling(0.25));
    CHECK_FALSE(s.infinite);
    CHECK_FALSE(s.saturated);
    // A(h|x|) vanishes for h|x| <= 1, and every weighted derivative stays below its value at the origin.
    CHECK(s.value == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s.alpha_at == 0);
    CHECK(s.x_at == 0.0);
    CHECK(s.per_alpha.size() == 61);
    CHECK(s.per_alpha[1] == doctest::Approx(0.25 * std::sqrt(2.0) * std::exp(-0.5)).epsilon(1e-3));
}

TEST_CASE("seminorm divergence markers")
{
    const auto c = seminorm(TF::constant(1), fact(), fact(), SeminormWeight::beurling(0.25));
    CHECK(c.infinite);
    CHECK(std::isinf(c.value));
    for (double h : {0.1, 1.0, 4.0})
        CHECK(seminorm(TF::expgrow(1.0), fact(), fact(), SeminormWeight::beurling(h)).infinite);
    CHECK_THROWS_AS(seminorm(TF::delta(0, 1), fact(), fact(), SeminormWeight::beurling(1)), InvalidArgument);
    CHECK_THROWS_AS(SeminormWeight::beurling(0.0), InvalidArgument);
}

TEST_CASE("seminorm homogeneity and monotonicity in h")
{
    const auto f = TF::gaussian(0.5, 0.8) + 0.3 * TF::hermite(2, 0.9);
    SeminormOptions o;
    o.alpha_cap = 30;
    const auto a = seminorm(f, fact(), fact(), SeminormWeight::beurling(0.7), o);
    const auto b = seminorm(-3.0 * f, fact(), fact(), SeminormWeight::beurling(0.7), o);
    CHECK(b.value == doctest::Approx(3.0 * a.value).epsilon(1e-12));

    double prev = 0.0;
    for (double h : {0.1, 0.25, 0.5, 1.0, 2.0}) {
        const auto s = seminorm(f, fact(), fact(), SeminormWeight::beurling(h), o);
        CHECK_FALSE(s.infinite);
        CHECK(s.value >= prev);
        prev = s.value;
    }
}

TEST_CASE("roumieu seminorm")
{
    SeminormOptions o;
    o.alpha_cap = 30;
    const auto r = RSpec::parse("linear").materialize(256);
    const auto s = seminorm(TF::gaussian(0, 1), fact(), fact(), SeminormWeight::roumieu(r), o);
    CHECK_FALSE(s.infinite);
    CHECK(s.value >= 1.0);
    CHECK(seminorm(TF::constant(2), fact(), fact(), SeminormWeight::roumieu(r), o).infinite);
}

TEST_CASE("growth fit oracles")
{
    const auto g = TF::gaussian(0, 1);
    const auto d = growth_fit(TF::delta(0, 1), g, fact());
    REQUIRE(d.found);
    CHECK(d.t == 0.0625);
    CHECK(d.C == 1.0);

    const auto c = growth_fit(TF::constant(1), g, fact());
    REQUIRE(c.found);
    CHECK(c.t == 0.0625);
    CHECK(c.C == doctest::Approx(1.7724538509055160).epsilon(1e-13));

    CHECK_THROWS_AS(growth_fit(TF::expgrow(1.0), TF::gaussian(0, std::sqrt(2.0)), fact()), Divergence);
    try {
        growth_fit(TF::expgrow(1.0), TF::gaussian(0, std::sqrt(2.0)), fact());
    } catch (const Divergence& e) {
        CHECK(std::string(e.what()).find("non-convolvable pair") != std::string::npos);
    }
}

TEST_CASE("delta is the identity for growth_fit")
{
    const auto phi = TF::gaussian(1.0, 0.5);
    const auto fit = growth_fit(TF::delta(0, 1), phi, fact());
    REQUIRE(fit.found);
    double expected = 0.0;
    for (int k = -8 * 64; k <= 8 * 64; ++k) {
        const double x = k / 8.0;
        const double w = x == 0.0 ? 0.0 : associated(fact(), fit.t * std::abs(x)).value;
        expected = std::max(expected, std::abs(phi.value(x)) * std::exp(-w));
    }
    CHECK(fit.C == expected);
}

TEST_CASE("growth fit under translation")
{
    const auto phi = TF::gaussian(0, 0.7);
    const double x0 = 3.0;
    GrowthOptions o;
    o.t_grid = {0.5};
    const auto a = growth_fit(TF::delta(0, 1), phi, fact(), o);
    const auto b = growth_fit(TF::delta(x0, 1), phi, fact(), o);
    REQUIRE(a.found);
    REQUIRE(b.found);
    const double factor = 2.0 * std::exp(associated(fact(), 0.5 * x0).value);
    CHECK(b.C <= factor * a.C);
    CHECK(a.C <= factor * b.C);
}

TEST_CASE("membership verdicts")
{
    const auto probes = default_probes();
    const auto d = membership_test(TF::delta(0, 1), fact(), probes);
    CHECK(d.verdict == Membership::consistent_with_membership);
    CHECK(d.witness == -1);
    const auto e = membership_test(TF::expdecay(1.0), fact(), probes);
    CHECK(e.verdict == Membership::consistent_with_membership);
    const auto g = membership_test(TF::expgrow(1.0), fact(), probes);
    CHECK(g.verdict == Membership::fails);
    CHECK(g.witness == 0);
    CHECK(std::string(to_string(g.verdict)) == "fails");
    CHECK_THROWS_AS(membership_test(TF::delta(0, 1), fact(), {}), InvalidArgument);
}

TEST_CASE("regularization ladder")
{
    const auto psi = TF::gaussian(0.3, 1.0);
    const auto chi = default_mollifier();
    const auto phi = TF::gaussian(0, 1);
    const auto r = regularize_report(psi, chi, phi, fact(), fact(), 0.25);
    REQUIRE(r.rows.size() == 5);
    CHECK(r.strictly_decreasing);
    CHECK(r.monotone_within_noise);
    CHECK(r.rows.back().point_error < 1e-4);
    for (const auto& row : r.rows)
        CHECK_FALSE(row.saturated);

    CHECK_THROWS_AS(regularize(psi, TF::gaussian(0, 0.15), phi, 2), InvalidArgument);
    CHECK_THROWS_AS(regularize(psi, chi, TF::gaussian(0.1, 1), 2), InvalidArgument);
    CHECK_THROWS_AS(regularize(psi, chi, phi, 0), InvalidArgument);
}
