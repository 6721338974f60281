#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qk/expr.hpp"

#include <random>
#include <set>

using namespace qk;
using TF = TestFunction;

namespace {

ParseError parse_failure(const std::string& text)
{
    try {
        parse_expr(text);
    } catch (const ParseError& e) {
        return e;
    }
    FAIL("expected a parse error for '" << text << "'");
    throw;
}

TF random_function(std::mt19937& rng, int depth)
{
    std::uniform_int_distribution<int> pick(0, depth > 0 ? 9 : 5);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::uniform_real_distribution<double> pos(0.1, 3.0);
    switch (pick(rng)) {
    case 0: return TF::gaussian(u(rng), pos(rng));
    case 1: return TF::hermite(static_cast<int>(pos(rng) * 2), pos(rng));
    case 2: return TF::expdecay(pos(rng));
    case 3: return TF::constant(u(rng));
    case 4: return TF::cosine(u(rng));
    case 5: return TF::weierstrass(0.5, 3, pos(rng), 4);
    case 6: return random_function(rng, depth - 1) + random_function(rng, depth - 1);
    case 7: return random_function(rng, depth - 1) * random_function(rng, depth - 1);
    case 8: return u(rng) * random_function(rng, depth - 1);
    default: return TF::reflect(random_function(rng, depth - 1));
    }
}

}  // namespace

TEST_CASE("atoms and operators")
{
    const auto g = parse_expr("gaussian(0,1)");
    CHECK(g.kind == FunctionExpr::Kind::atom);
    CHECK(g.name == "gaussian");
    CHECK(g.args == std::vector<double>{0.0, 1.0});

    const auto s = parse_expr("0.5*gaussian(0,1)+expdecay(1)");
    REQUIRE(s.kind == FunctionExpr::Kind::sum);
    REQUIRE(s.children[0].kind == FunctionExpr::Kind::scaled);
    CHECK(s.children[0].args[0] == 0.5);
    CHECK(s.children[0].children[0].name == "gaussian");
    CHECK(s.children[1].name == "expdecay");

    const auto p = parse_expr("gaussian(0,1)*cos(2)+delta(1,0.5)");
    CHECK(p.kind == FunctionExpr::Kind::sum);
    CHECK(p.children[0].kind == FunctionExpr::Kind::product);

    const auto r = parse_expr(" reflect( affine(gaussian(1,1), 2, -1) ) ");
    CHECK(r.kind == FunctionExpr::Kind::reflect);
    CHECK(r.children[0].kind == FunctionExpr::Kind::affine);
    CHECK(r.children[0].args == std::vector<double>{2.0, -1.0});

    CHECK(parse_expr("conv(gaussian(0,1),expdecay(1))").kind == FunctionExpr::Kind::convolve);
    CHECK(parse_expr("weier(0.5,3,1,12)").args.size() == 4);
    CHECK(parse_expr("-1.5e-1*(gaussian(0,1)+const(2))").args[0] == -0.15);
}

TEST_CASE("values follow the descriptor")
{
    const auto f = parse_function("0.5*gaussian(0,1)+expdecay(1)");
    for (double x : {-2.0, 0.0, 0.7})
        CHECK(f.value(x) == 0.5 * std::exp(-x * x) + std::exp(-std::abs(x)));
    const auto r = parse_function("reflect(gaussian(1,2))");
    CHECK(r.value(-1.0) == 1.0);
}

TEST_CASE("positioned errors with distinct codes")
{
    const auto unknown = parse_failure("gauss(0,1)");
    CHECK(unknown.failure == ParseFailure::unknown_atom);
    CHECK(unknown.line == 1);
    CHECK(unknown.column == 1);
    CHECK(std::find(unknown.expected.begin(), unknown.expected.end(), "gaussian") != unknown.expected.end());
    CHECK(unknown.code() == ErrorCode::parse_error);

    const auto arity = parse_failure("const(1)+gaussian(0)");
    CHECK(arity.failure == ParseFailure::arity_mismatch);
    CHECK(arity.column == 10);
    CHECK(parse_failure("expdecay(1,2)").failure == ParseFailure::arity_mismatch);
    CHECK(parse_failure("delta(0)").failure == ParseFailure::arity_mismatch);

    const auto num = parse_failure("gaussian(1.2.3,1)");
    CHECK(num.failure == ParseFailure::malformed_number);
    CHECK(num.column == 10);
    for (const char* bad : {"gaussian(1e,1)", "gaussian(nan,1)", "gaussian(0x1,1)", "gaussian(--1,1)", "gaussian(inf,1)"})
        CHECK(parse_failure(bad).failure == ParseFailure::malformed_number);

    CHECK(parse_failure("gaussian(0,-1)").failure == ParseFailure::bad_literal);
    CHECK(parse_failure("hermite(1.5,1)").failure == ParseFailure::bad_literal);
    CHECK(parse_failure("weier(0.5,3.5,1,12)").failure == ParseFailure::bad_literal);
    CHECK(parse_failure("delta(0,1)*gaussian(0,1)").failure == ParseFailure::bad_literal);

    const auto tail = parse_failure("gaussian(0,1)+");
    CHECK(tail.failure == ParseFailure::unexpected_token);
    CHECK(tail.column == 15);
    CHECK(parse_failure("gaussian(0,1) cos(1)").failure == ParseFailure::unexpected_token);
    CHECK(parse_failure("2").failure == ParseFailure::unexpected_token);
    CHECK(parse_failure("").failure == ParseFailure::unexpected_token);

    const auto multi = parse_failure("gaussian(0,1)+\n  gauss(1,1)");
    CHECK(multi.line == 2);
    CHECK(multi.column == 3);

    std::set<std::string> codes;
    for (auto f : {ParseFailure::unknown_atom, ParseFailure::arity_mismatch, ParseFailure::malformed_number,
                   ParseFailure::bad_literal, ParseFailure::unexpected_token})
        codes.insert(to_string(f));
    CHECK(codes.size() == 5);
}

TEST_CASE("print and parse round trip")
{
    for (const char* text :
         {"gaussian(0,1)", "0.5*gaussian(0,1)+expdecay(1)", "hermite(2,0.7)*cos(3)", "reflect(delta(1,2))",
          "affine(gaussian(0,1),2,-1)", "conv(gaussian(0,1),expdecay(1))", "weier(0.5,3,1,12)", "-3*(const(1)+cos(2))",
          "gaussian(0,1)*(cos(1)*cos(2))", "2*(3*expgrow(0.5))"}) {
        const auto once = parse_expr(text).to_string();
        CHECK(once == text);
        CHECK(parse_expr(once).to_string() == once);
    }

    std::mt19937 rng(20240611);
    for (int i = 0; i < 300; ++i) {
        const auto f = random_function(rng, 3);
        const std::string printed = f.to_string();
        const auto back = parse_function(printed);
        CHECK(back.to_string() == printed);
        for (double x : {-1.3, 0.0, 0.4})
            CHECK(back.value(x) == f.value(x));
    }
}
