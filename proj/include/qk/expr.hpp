#pragma once

#include "qk/errors.hpp"
#include "qk/test_function.hpp"

#include <string>
#include <vector>

namespace qk {

enum class ParseFailure {
    unknown_atom,
    arity_mismatch,
    malformed_number,
    bad_literal,       // well-formed number the atom does not accept (e.g. a negative scale)
    unexpected_token,
};

const char* to_string(ParseFailure f);

struct ParseError : Error {
    ParseError(ParseFailure failure, int line, int column, std::vector<std::string> expected, const std::string& detail);

    ParseFailure failure;
    int line;
    int column;
    std::vector<std::string> expected;
};

// Syntax tree of a function descriptor:
//   atom := gaussian(c,s) | hermite(n,s) | expdecay(t) | expgrow(a) | const(c) | cos(w)
//         | weier(a,b,t,N) | delta(x0,w)
//   expr := atom | expr "+" expr | expr "*" expr | num "*" expr | "reflect(" expr ")"
//         | "affine(" expr "," a "," b ")" | "conv(" expr "," expr ")" | "(" expr ")"
struct FunctionExpr {
    enum class Kind { atom, sum, product, scaled, reflect, affine, convolve };
    Kind kind = Kind::atom;
    std::string name;          // atom name
    std::vector<double> args;  // atom arguments, the scale factor, or affine's (a, b)
    std::vector<FunctionExpr> children;
    int line = 1;
    int column = 1;

    std::string to_string() const;
    TestFunction to_function() const;
};

FunctionExpr parse_expr(const std::string& text);

// parse_expr(text).to_function()
TestFunction parse_function(const std::string& text);

}  // namespace qk
