#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qk/convolution.hpp"
#include "qk/errors.hpp"

#include <cmath>

using namespace qk;
using TF = TestFunction;

namespace {

std::vector<ProbePair> swapped(std::vector<ProbePair> probes)
{
    for (auto& p : probes)
        std::swap(p.phi, p.psi);
    return probes;
}

PairOptions acknowledged()
{
    PairOptions o;
    o.acknowledge = true;
    return o;
}

}  // namespace

TEST_CASE("criterion (iv) verdicts")
{
    const auto probes = default_probe_pairs();
    REQUIRE(probes.size() == 8);

    const auto gg = criterion_iv(TF::gaussian(0, 1), TF::gaussian(0, 1), probes);
    CHECK(gg.verdict == Verdict::exists);
    for (const auto& p : gg.probes) {
        CHECK(p.integrable);
        CHECK(p.agreed);
        CHECK(p.tail_exponent < -0.05);
    }

    const auto cc = criterion_iv(TF::constant(1), TF::constant(1), probes);
    CHECK(cc.verdict == Verdict::fails);
    REQUIRE_FALSE(cc.witnesses.empty());
    const auto& w = cc.probes[static_cast<std::size_t>(cc.witnesses.front())];
    CHECK(w.status == ProbeStatus::non_integrable);
    CHECK(w.tail_exponent >= 0.0);
    CHECK(w.tail_residual < 0.05);
    CHECK_FALSE(w.agreed);
    CHECK(w.doublings == 8);

    const auto cg = criterion_iv(TF::constant(1), TF::gaussian(0, 1), probes);
    CHECK(cg.verdict == Verdict::exists);

    CHECK(std::string(to_string(Verdict::fails)) == "fails");
    CHECK_THROWS_AS(criterion_iv(TF::constant(1), TF::constant(1), {}), InvalidArgument);
}

TEST_CASE("criterion (iv) is symmetric under swapping the pair and the probes")
{
    const auto probes = default_probe_pairs();
    const std::vector<std::pair<TF, TF>> pairs = {
        {TF::gaussian(0, 1), TF::gaussian(0.5, 0.8)},
        {TF::constant(1), TF::gaussian(0, 1)},
        {TF::constant(1), TF::constant(2)},
        {TF::delta(1.0), TF::expdecay(1.0)},
    };
    for (const auto& [f1, f2] : pairs) {
        const auto a = criterion_iv(f1, f2, probes);
        const auto b = criterion_iv(f2, f1, swapped(probes));
        CHECK(a.verdict == b.verdict);
    }
}

TEST_CASE("pair_value oracles")
{
    const auto g = TF::gaussian(0, 1);
    CHECK(pair_value(TF::delta(0), TF::delta(0), g) == 1.0);
    CHECK(pair_value(g, g, g) == doctest::Approx(1.8137993642342178).epsilon(1e-8));
    CHECK(pair_value(TF::constant(1), g, g) == doctest::Approx(pi).epsilon(1e-8));
    // Iterated route for a constant without the Fourier shortcut.
    CHECK(pair_value(TF::constant(1), g, g * g, acknowledged()) == doctest::Approx(pi / std::sqrt(2.0)).epsilon(1e-8));
}

TEST_CASE("pair_value refuses a non-convolvable pair")
{
    const auto g = TF::gaussian(0, 1);
    CHECK_THROWS_AS(pair_value(TF::constant(1), TF::constant(1), g), InvalidArgument);
    CHECK_THROWS_AS(pair_value(TF::constant(1), TF::constant(1), g, acknowledged()), Divergence);
    CHECK_THROWS_AS(pair_value(g, g, TF::delta(0)), InvalidArgument);
}

TEST_CASE("pair_value is bilinear and reflection invariant")
{
    const auto f1 = TF::gaussian(0.3, 0.9);
    const auto f1b = TF::expdecay(1.5);
    const auto f2 = TF::gaussian(-0.5, 1.2);
    const auto phi = TF::gaussian(0.2, 1.0);
    const auto phib = TF::hermite(1, 0.7);
    const auto o = acknowledged();

    const double a = pair_value(f1, f2, phi, o);
    const double b = pair_value(f1b, f2, phi, o);
    const double ab = pair_value(f1 + 2.0 * f1b, f2, phi, o);
    CHECK(std::abs(ab - (a + 2.0 * b)) <= 1e-10 * (std::abs(a) + 2.0 * std::abs(b)));

    const double c = pair_value(f1, f2, phib, o);
    const double ac = pair_value(f1, f2, phi + (-3.0) * phib, o);
    CHECK(std::abs(ac - (a - 3.0 * c)) <= 1e-10 * (std::abs(a) + 3.0 * std::abs(c)));

    const double r = pair_value(TF::reflect(f1), TF::reflect(f2), TF::reflect(phi), o);
    CHECK(std::abs(r - a) <= 1e-10 * std::abs(a));
}

TEST_CASE("delta is neutral in pair_value")
{
    const auto f = TF::expdecay(1.0);
    const auto phi = TF::gaussian(0.3, 1.0);
    const double direct = integrate([&](double y) { return f.value(y) * phi.value(y); }, -40.0, 40.0, 1e-13);
    CHECK(std::abs(pair_value(TF::delta(0), f, phi, acknowledged()) - direct) <= 1e-8);
    CHECK(std::abs(pair_value(f, TF::delta(0), phi, acknowledged()) - direct) <= 1e-8);
}

TEST_CASE("algebra checks with the identity multiplier")
{
    const auto g = TF::gaussian(0, 1);
    const auto rep = algebra_checks(g, TF::gaussian(0.5, 0.8), Multiplier::identity(), {g, TF::gaussian(1, 0.6)});
    REQUIRE(rep.rows.size() == 2);
    for (const auto& row : rep.rows) {
        CHECK(row.commutativity <= 1e-8);
        CHECK(row.interchange == 0.0);
        CHECK(row.on_test == row.on_f2);
        CHECK(row.has_on_f1);
        CHECK(row.on_f1 == row.on_f2);
    }
    CHECK(rep.pass);
}

TEST_CASE("P(D) moves across the convolution")
{
    UltrapolyParams p;
    p.H = 2.0;
    const auto P = Multiplier::from(Ultrapolynomial::build(make_sequence(SequenceSpec::factorial(256)), p));
    const auto f2 = TF::gaussian(0, 2);
    const auto phi = TF::gaussian(0.5, 2);

    const auto d = algebra_checks(TF::delta(0), f2, P, {phi});
    REQUIRE(d.rows.size() == 1);
    const auto& row = d.rows.front();
    CHECK_FALSE(row.has_on_f1);
    CHECK(row.has_spectral);
    CHECK(std::abs(row.on_test - row.on_f2) <= 1e-6);
    CHECK(row.interchange <= 1e-6);
    CHECK(d.pass);

    const auto s = algebra_checks(TF::gaussian(0.3, 2), f2, P, {phi});
    CHECK(s.rows.front().has_on_f1);
    CHECK(s.rows.front().commutativity <= 1e-8);
    CHECK(s.rows.front().interchange <= 1e-5 * s.rows.front().scale);
    CHECK(s.pass);

    CHECK_THROWS_AS(algebra_checks(TF::gaussian(0, 1), TF::delta(0), P, {phi}), InvalidArgument);
}
