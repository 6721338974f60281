#include "qk/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <map>

namespace qk {

namespace {

struct AtomSpec {
    int arity;
    std::vector<int> integer_args;  // positions that must hold integers
};

const std::map<std::string, AtomSpec>& atoms()
{
    static const std::map<std::string, AtomSpec> table = {
        {"gaussian", {2, {}}}, {"hermite", {2, {0}}}, {"expdecay", {1, {}}}, {"expgrow", {1, {}}},
        {"const", {1, {}}},    {"cos", {1, {}}},      {"weier", {4, {1, 3}}}, {"delta", {2, {}}},
    };
    return table;
}

std::vector<std::string> primary_starts()
{
    std::vector<std::string> out;
    for (const auto& [name, spec] : atoms())
        out.push_back(name);
    for (const char* s : {"reflect", "affine", "conv", "(", "number"})
        out.emplace_back(s);
    return out;
}

std::string join(const std::vector<std::string>& v)
{
    std::string out;
    for (const auto& s : v)
        out += (out.empty() ? "" : ", ") + s;
    return out;
}

TestFunction build_atom(const std::string& name, const std::vector<double>& a)
{
    using TF = TestFunction;
    if (name == "gaussian")
        return TF::gaussian(a[0], a[1]);
    if (name == "hermite")
        return TF::hermite(static_cast<int>(a[0]), a[1]);
    if (name == "expdecay")
        return TF::expdecay(a[0]);
    if (name == "expgrow")
        return TF::expgrow(a[0]);
    if (name == "const")
        return TF::constant(a[0]);
    if (name == "cos")
        return TF::cosine(a[0]);
    if (name == "weier")
        return TF::weierstrass(a[0], static_cast<int>(a[1]), a[2], static_cast<int>(a[3]));
    return TF::delta(a[0], a[1]);
}

class Parser {
public:
    explicit Parser(const std::string& text) : s_(text) {}

    FunctionExpr parse()
    {
        FunctionExpr e = expr();
        skip_space();
        if (i_ != s_.size())
            fail(ParseFailure::unexpected_token, {"+", "*", "end of input"}, "unexpected '" + rest() + "'");
        return e;
    }

private:
    const std::string& s_;
    std::size_t i_ = 0;
    int line_ = 1;
    std::size_t line_start_ = 0;

    int column() const { return static_cast<int>(i_ - line_start_) + 1; }
    std::string rest() const { return s_.substr(i_, 12); }

    [[noreturn]] void fail(ParseFailure f, std::vector<std::string> expected, const std::string& detail)
    {
        throw ParseError(f, line_, column(), std::move(expected), detail);
    }

    // Moves the cursor back to (line, col) so errors point at the start of a node.
    void seek(int line, int col)
    {
        std::size_t start = 0;
        for (int k = 1; k < line; ++k)
            start = s_.find('\n', start) + 1;
        line_ = line;
        line_start_ = start;
        i_ = start + static_cast<std::size_t>(col - 1);
    }

    void skip_space()
    {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) {
            if (s_[i_] == '\n') {
                ++line_;
                line_start_ = i_ + 1;
            }
            ++i_;
        }
    }

    bool peek(char c)
    {
        skip_space();
        return i_ < s_.size() && s_[i_] == c;
    }

    void expect(char c, std::vector<std::string> expected)
    {
        if (!peek(c))
            fail(ParseFailure::unexpected_token, std::move(expected),
                 i_ < s_.size() ? "unexpected '" + rest() + "'" : "unexpected end of input");
        ++i_;
    }

    bool at_number()
    {
        skip_space();
        if (i_ >= s_.size())
            return false;
        const char c = s_[i_];
        return std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+';
    }

    double number()
    {
        skip_space();
        const std::size_t start = i_;
        std::size_t j = i_;
        if (j < s_.size() && (s_[j] == '-' || s_[j] == '+'))
            ++j;
        while (j < s_.size()) {
            const char c = s_[j];
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_') {
                ++j;
            } else if ((c == '-' || c == '+') && (s_[j - 1] == 'e' || s_[j - 1] == 'E')) {
                ++j;
            } else {
                break;
            }
        }
        std::string tok = s_.substr(start, j - start);
        if (tok.empty())
            fail(ParseFailure::unexpected_token, {"number"}, "unexpected end of input");
        const char* b = tok.data() + (tok[0] == '+' ? 1 : 0);
        const char* e = tok.data() + tok.size();
        double v = 0.0;
        const auto r = std::from_chars(b, e, v, std::chars_format::general);
        const bool digits_only = tok.find_first_of("nN") == std::string::npos;  // rejects inf/nan spellings
        if (r.ec != std::errc() || r.ptr != e || !digits_only || !std::isfinite(v) || b == e)
            fail(ParseFailure::malformed_number, {"number"}, "malformed number '" + tok + "'");
        i_ = j;
        return v;
    }

    std::string identifier()
    {
        skip_space();
        const std::size_t start = i_;
        while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_'))
            ++i_;
        return s_.substr(start, i_ - start);
    }

    FunctionExpr make(FunctionExpr::Kind k, int line, int col)
    {
        FunctionExpr e;
        e.kind = k;
        e.line = line;
        e.column = col;
        return e;
    }

    // Composite constructors reject some operands (point masses in products, a = 0 in affine).
    FunctionExpr checked(FunctionExpr e)
    {
        try {
            (void)e.to_function();
        } catch (const InvalidArgument& err) {
            seek(e.line, e.column);
            fail(ParseFailure::bad_literal, {}, err.what());
        }
        return e;
    }

    FunctionExpr expr()
    {
        FunctionExpr lhs = term();
        while (peek('+')) {
            skip_space();
            const int l = line_, c = column();
            ++i_;
            FunctionExpr e = make(FunctionExpr::Kind::sum, l, c);
            e.children = {std::move(lhs), term()};
            lhs = std::move(e);
        }
        return lhs;
    }

    FunctionExpr term()
    {
        FunctionExpr lhs = unary();
        while (peek('*')) {
            const int l = line_, c = column();
            ++i_;
            FunctionExpr e = make(FunctionExpr::Kind::product, l, c);
            e.children = {std::move(lhs), unary()};
            lhs = checked(std::move(e));
        }
        return lhs;
    }

    FunctionExpr unary()
    {
        skip_space();
        if (at_number()) {
            const int l = line_, c = column();
            const double v = number();
            expect('*', {"*"});
            FunctionExpr e = make(FunctionExpr::Kind::scaled, l, c);
            e.args = {v};
            e.children = {unary()};
            return e;
        }
        return primary();
    }

    FunctionExpr primary()
    {
        skip_space();
        const int l = line_, c = column();
        if (i_ >= s_.size())
            fail(ParseFailure::unexpected_token, primary_starts(), "unexpected end of input");
        if (s_[i_] == '(') {
            ++i_;
            FunctionExpr e = expr();
            expect(')', {")"});
            return e;
        }
        if (!std::isalpha(static_cast<unsigned char>(s_[i_])))
            fail(ParseFailure::unexpected_token, primary_starts(), "unexpected '" + rest() + "'");
        const std::string name = identifier();

        if (name == "reflect") {
            expect('(', {"("});
            FunctionExpr e = make(FunctionExpr::Kind::reflect, l, c);
            e.children = {expr()};
            expect(')', {")"});
            return e;
        }
        if (name == "affine") {
            expect('(', {"("});
            FunctionExpr e = make(FunctionExpr::Kind::affine, l, c);
            e.children = {expr()};
            expect(',', {","});
            e.args.push_back(number());
            expect(',', {","});
            e.args.push_back(number());
            expect(')', {")"});
            return checked(std::move(e));
        }
        if (name == "conv") {
            expect('(', {"("});
            FunctionExpr e = make(FunctionExpr::Kind::convolve, l, c);
            e.children.push_back(expr());
            expect(',', {","});
            e.children.push_back(expr());
            expect(')', {")"});
            return checked(std::move(e));
        }

        const auto it = atoms().find(name);
        if (it == atoms().end()) {
            i_ -= name.size();
            fail(ParseFailure::unknown_atom, primary_starts(), "unknown atom '" + name + "'");
        }
        FunctionExpr e = make(FunctionExpr::Kind::atom, l, c);
        e.name = name;
        expect('(', {"("});
        if (!peek(')')) {
            e.args.push_back(number());
            while (peek(',')) {
                ++i_;
                e.args.push_back(number());
            }
        }
        const int arity = it->second.arity;
        if (static_cast<int>(e.args.size()) != arity) {
            seek(l, c);
            const std::string detail = name + " takes " + std::to_string(arity) + " argument" + (arity == 1 ? "" : "s") +
                                       ", got " + std::to_string(e.args.size());
            fail(ParseFailure::arity_mismatch, {std::to_string(arity) + " arguments"}, detail);
        }
        expect(')', {",", ")"});
        for (int k : it->second.integer_args) {
            const double v = e.args[static_cast<std::size_t>(k)];
            if (v != std::floor(v)) {
                seek(l, c);
                fail(ParseFailure::bad_literal, {"integer"},
                     name + " argument " + std::to_string(k + 1) + " must be an integer");
            }
        }
        try {
            (void)build_atom(name, e.args);
        } catch (const InvalidArgument& err) {
            seek(l, c);
            fail(ParseFailure::bad_literal, {}, err.what());
        }
        return e;
    }
};

}  // namespace

const char* to_string(ParseFailure f)
{
    switch (f) {
    case ParseFailure::unknown_atom: return "unknown-atom";
    case ParseFailure::arity_mismatch: return "arity-mismatch";
    case ParseFailure::malformed_number: return "malformed-number";
    case ParseFailure::bad_literal: return "bad-literal";
    case ParseFailure::unexpected_token: return "unexpected-token";
    }
    return "unexpected-token";
}

ParseError::ParseError(ParseFailure f, int line_, int column_, std::vector<std::string> expected_,
                       const std::string& detail)
    : Error(ErrorCode::parse_error, "line " + std::to_string(line_) + ", column " + std::to_string(column_) + ": " +
                                        detail + (expected_.empty() ? "" : " (expected " + join(expected_) + ")")),
      failure(f), line(line_), column(column_), expected(std::move(expected_))
{
}

TestFunction FunctionExpr::to_function() const
{
    using TF = TestFunction;
    switch (kind) {
    case Kind::atom: return build_atom(name, args);
    case Kind::sum: return children[0].to_function() + children[1].to_function();
    case Kind::product: return children[0].to_function() * children[1].to_function();
    case Kind::scaled: return args[0] * children[0].to_function();
    case Kind::reflect: return TF::reflect(children[0].to_function());
    case Kind::affine: return TF::affine(children[0].to_function(), args[0], args[1]);
    case Kind::convolve: return TF::convolve(children[0].to_function(), children[1].to_function());
    }
    throw InvalidArgument("unknown expression node");
}

std::string FunctionExpr::to_string() const { return to_function().to_string(); }

FunctionExpr parse_expr(const std::string& text) { return Parser(text).parse(); }

TestFunction parse_function(const std::string& text) { return parse_expr(text).to_function(); }

}  // namespace qk
