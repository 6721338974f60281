#include "qk/weight_sequences.hpp"

#include "qk/errors.hpp"
#include "qk/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

namespace qk {

namespace {

constexpr double max_fitted_constant = 65536.0;  // 2^16
constexpr double log_slack = 1e-12;

std::string format_double(double v)
{
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::vector<double> parse_list(const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw InvalidArgument("malformed number '" + item + "'");
        }
        if (used != item.size() && item.find_first_not_of(" \t", used) != std::string::npos)
            throw InvalidArgument("malformed number '" + item + "'");
        out.push_back(v);
    }
    return out;
}

std::string join_list(std::span<const double> v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            out += ',';
        out += format_double(v[i]);
    }
    return out;
}

double parse_number(const std::string& key, const std::string& text)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size())
            return v;
    } catch (const std::exception&) {
    }
    throw InvalidArgument("bad numeric value for '" + key + "': '" + text + "'");
}

}  // namespace

// ---------------------------------------------------------------------------
// RSequence

RSequence::RSequence(std::vector<double> v) : values_(std::move(v))
{
    log_prefix_.assign(values_.size() + 1, 0.0);
    for (std::size_t j = 0; j < values_.size(); ++j)
        log_prefix_[j + 1] = log_prefix_[j] + std::log(values_[j]);
}

RSequence RSequence::from_values(std::vector<double> values)
{
    if (values.size() < 2)
        throw InvalidArgument("r-sequence needs at least two terms");
    for (std::size_t j = 0; j < values.size(); ++j) {
        if (!(values[j] > 0.0) || !std::isfinite(values[j]))
            throw InvalidArgument("r-sequence terms must be positive and finite");
        if (j > 0 && values[j] < values[j - 1])
            throw InvalidArgument("r-sequence must be nondecreasing (term " + std::to_string(j + 1) + ")");
    }
    if (!(values.back() > values.front()))
        throw InvalidArgument("r-sequence must grow: last term equals the first");
    return RSequence(std::move(values));
}

double RSequence::operator[](int p) const
{
    if (p < 1)
        throw InvalidArgument("r-sequence index starts at 1");
    return values_[static_cast<std::size_t>(std::min(p, size()) - 1)];
}

double RSequence::log_product(int p) const
{
    if (p <= size())
        return log_prefix_[static_cast<std::size_t>(std::max(p, 0))];
    return log_prefix_.back() + (p - size()) * std::log(values_.back());
}

RSequence RSpec::materialize(int p_max) const
{
    std::vector<double> v;
    if (kind == Kind::table) {
        v = table;
    } else {
        v.resize(static_cast<std::size_t>(p_max));
        for (int p = 1; p <= p_max; ++p) {
            double r = 0;
            switch (kind) {
            case Kind::linear: r = p; break;
            case Kind::log1p: r = std::log1p(static_cast<double>(p)); break;
            case Kind::power: r = std::pow(static_cast<double>(p), exponent); break;
            case Kind::table: break;
            }
            v[static_cast<std::size_t>(p - 1)] = r;
        }
    }
    return RSequence::from_values(std::move(v));
}

std::string RSpec::to_string() const
{
    switch (kind) {
    case Kind::linear: return "linear";
    case Kind::log1p: return "log1p";
    case Kind::power: return "power:" + format_double(exponent);
    case Kind::table: return "values:" + join_list(table);
    }
    return "linear";
}

RSpec RSpec::parse(const std::string& text)
{
    RSpec r;
    if (text == "linear") {
        r.kind = Kind::linear;
    } else if (text == "log1p") {
        r.kind = Kind::log1p;
    } else if (text.rfind("power:", 0) == 0) {
        r.kind = Kind::power;
        r.exponent = parse_number("r", text.substr(6));
        if (!(r.exponent > 0))
            throw InvalidArgument("r-sequence power exponent must be positive");
    } else if (text.rfind("values:", 0) == 0) {
        r.kind = Kind::table;
        r.table = parse_list(text.substr(7));
    } else {
        throw InvalidArgument("unknown r-sequence spec '" + text + "'");
    }
    return r;
}

RSequence subordinate(const RSequence& k)
{
    const int n = k.size();
    std::vector<double> out(static_cast<std::size_t>(n));
    double running_min = std::numeric_limits<double>::infinity();
    for (int p = 1; p <= n; ++p) {
        running_min = std::min(running_min, k[p] / p);
        out[static_cast<std::size_t>(p - 1)] = p * running_min;
    }
    // The running minimum can only shrink, so a rounding step could undercut k'_{p-1}.
    for (std::size_t j = 1; j < out.size(); ++j)
        out[j] = std::max(out[j], out[j - 1]);
    for (std::size_t j = 0; j < out.size(); ++j)
        out[j] = std::min(out[j], k[static_cast<int>(j) + 1]);

    // Product inequality over the stored range; a failure here is a bug, not bad input.
    std::vector<double> lp(out.size() + 1, 0.0);
    for (std::size_t j = 0; j < out.size(); ++j)
        lp[j + 1] = lp[j] + std::log(out[j]);
    const double log2 = std::log(2.0);
    for (int s = 2; s <= n; ++s) {
        for (int p = 1; p < s; ++p) {
            const double lhs = lp[static_cast<std::size_t>(s)];
            const double rhs = s * log2 + lp[static_cast<std::size_t>(p)] + lp[static_cast<std::size_t>(s - p)];
            if (lhs > rhs + 1e-9 * (1.0 + std::abs(lhs)))
                throw Inconsistent("subordinate: product inequality violated at p=" + std::to_string(p) +
                                   ", q=" + std::to_string(s - p));
        }
    }
    if (!(out.back() > out.front())) {
        // Happens only for inputs whose growth stalls inside the table.
        throw InvalidArgument("subordinate sequence does not grow on the stored range");
    }
    return RSequence::from_values(std::move(out));
}

// ---------------------------------------------------------------------------
// SequenceSpec

SequenceSpec SequenceSpec::gevrey(double sigma, int p_max)
{
    SequenceSpec s;
    s.kind = Kind::gevrey;
    s.sigma = sigma;
    s.p_max = p_max;
    return s;
}

SequenceSpec SequenceSpec::factorial(int p_max)
{
    SequenceSpec s;
    s.kind = Kind::factorial;
    s.p_max = p_max;
    return s;
}

SequenceSpec SequenceSpec::custom(std::vector<double> table)
{
    SequenceSpec s;
    s.kind = Kind::custom;
    s.p_max = static_cast<int>(table.size()) - 1;
    s.table = std::move(table);
    return s;
}

SequenceSpec SequenceSpec::modulated(double sigma, RSpec r, int p_max)
{
    SequenceSpec s;
    s.kind = Kind::modulated;
    s.sigma = sigma;
    s.r = std::move(r);
    s.p_max = p_max;
    return s;
}

std::string SequenceSpec::to_kv() const
{
    std::ostringstream os;
    switch (kind) {
    case Kind::gevrey: os << "generator=gevrey\nsigma=" << format_double(sigma) << '\n'; break;
    case Kind::factorial: os << "generator=factorial\n"; break;
    case Kind::custom: os << "generator=custom\nvalues=" << join_list(table) << '\n'; break;
    case Kind::modulated:
        os << "generator=modulated\nsigma=" << format_double(sigma) << "\nr=" << r.to_string() << '\n';
        break;
    }
    os << "pmax=" << p_max << '\n';
    return os.str();
}

SequenceSpec SequenceSpec::from_kv(const std::string& text)
{
    std::map<std::string, std::string> kv;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line[0] == '#')
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidArgument("sequence spec line without '=': '" + line + "'");
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    const auto take = [&](const std::string& key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end())
            return std::nullopt;
        auto v = it->second;
        kv.erase(it);
        return v;
    };
    const auto gen = take("generator");
    if (!gen)
        throw InvalidArgument("sequence spec needs 'generator'");
    SequenceSpec s;
    if (*gen == "gevrey") {
        s.kind = Kind::gevrey;
        const auto sigma = take("sigma");
        if (!sigma)
            throw InvalidArgument("gevrey sequence needs 'sigma'");
        s.sigma = parse_number("sigma", *sigma);
    } else if (*gen == "factorial") {
        s.kind = Kind::factorial;
    } else if (*gen == "custom") {
        s.kind = Kind::custom;
        const auto values = take("values");
        if (!values)
            throw InvalidArgument("custom sequence needs 'values'");
        s.table = parse_list(*values);
        s.p_max = static_cast<int>(s.table.size()) - 1;
    } else if (*gen == "modulated") {
        s.kind = Kind::modulated;
        if (const auto sigma = take("sigma"))
            s.sigma = parse_number("sigma", *sigma);
        const auto r = take("r");
        if (!r)
            throw InvalidArgument("modulated sequence needs 'r'");
        s.r = RSpec::parse(*r);
    } else {
        throw InvalidArgument("unknown generator '" + *gen + "'");
    }
    if (const auto pmax = take("pmax")) {
        const double v = parse_number("pmax", *pmax);
        if (v != std::floor(v))
            throw InvalidArgument("pmax must be an integer");
        s.p_max = static_cast<int>(v);
    }
    if (!kv.empty())
        throw InvalidArgument("unknown sequence spec key '" + kv.begin()->first + "'");
    return s;
}

// ---------------------------------------------------------------------------
// WeightSequence

WeightSequence::WeightSequence(std::vector<double> log_ratios, std::optional<RatioLaw> law, std::string generator)
    : log_ratios_(std::move(log_ratios)), law_(law), generator_(std::move(generator))
{
    if (log_ratios_.size() < 3)
        throw InvalidArgument("weight sequence needs p_max >= 2");
    log_ratios_[0] = 0.0;
    log_values_.assign(log_ratios_.size(), 0.0);
    for (std::size_t p = 1; p < log_ratios_.size(); ++p) {
        if (!std::isfinite(log_ratios_[p]))
            throw InvalidArgument("weight sequence entries must be positive and finite");
        log_values_[p] = log_values_[p - 1] + log_ratios_[p];
    }
}

double WeightSequence::log_ratio(int p) const
{
    if (p < 1)
        throw InvalidArgument("ratio index starts at 1");
    if (p <= p_max())
        return log_ratios_[static_cast<std::size_t>(p)];
    if (!law_)
        throw OutOfBox("ratio m_" + std::to_string(p) + " requested past p_max=" + std::to_string(p_max()) +
                       " of a tabulated sequence");
    if (p <= law_->exact_from)
        throw OutOfBox("ratio law does not cover index " + std::to_string(p));
    return law_->sigma * std::log(static_cast<double>(p)) + law_->log_c;
}

WeightSequence WeightSequence::power(double q) const
{
    std::vector<double> r(log_ratios_);
    for (auto& v : r)
        v *= q;
    std::optional<RatioLaw> law;
    if (law_)
        law = RatioLaw{law_->sigma * q, law_->log_c * q, law_->exact_from};
    WeightSequence out(std::move(r), law, generator_ + "^" + format_double(q));
    for (std::size_t p = 0; p < log_values_.size(); ++p)
        out.log_values_[p] = q * log_values_[p];
    return out;
}

WeightSequence WeightSequence::modulate(const RSequence& l) const
{
    std::vector<double> r(log_ratios_);
    for (int p = 1; p <= p_max(); ++p)
        r[static_cast<std::size_t>(p)] += std::log(l[p]);
    std::optional<RatioLaw> law;
    if (law_)
        law = RatioLaw{law_->sigma, law_->log_c + std::log(l.values().back()), std::max(law_->exact_from, l.size())};
    return WeightSequence(std::move(r), law, generator_ + "*prod(l)");
}

WeightSequence make_sequence(const SequenceSpec& spec)
{
    const int p_max = spec.p_max;
    if (p_max < 2)
        throw InvalidArgument("p_max must be at least 2");
    switch (spec.kind) {
    case SequenceSpec::Kind::gevrey:
    case SequenceSpec::Kind::factorial: {
        const double sigma = spec.kind == SequenceSpec::Kind::factorial ? 1.0 : spec.sigma;
        if (!(sigma > 0.0) || !std::isfinite(sigma))
            throw InvalidArgument("gevrey exponent must be positive");
        std::vector<double> r(static_cast<std::size_t>(p_max) + 1, 0.0);
        for (int p = 2; p <= p_max; ++p)
            r[static_cast<std::size_t>(p)] = sigma * std::log(static_cast<double>(p));
        std::string gen = spec.kind == SequenceSpec::Kind::factorial ? "factorial" : "gevrey(" + format_double(sigma) + ")";
        WeightSequence out(std::move(r), RatioLaw{sigma, 0.0, 0}, gen);
        return out;
    }
    case SequenceSpec::Kind::custom: {
        const auto& t = spec.table;
        if (t.size() < 3)
            throw InvalidArgument("p_max must be at least 2");
        for (double v : t)
            if (!(v > 0.0) || !std::isfinite(v))
                throw InvalidArgument("custom sequence entries must be positive");
        if (t[0] != 1.0 || t[1] != 1.0)
            throw InvalidArgument("custom sequence must start with M_0 = M_1 = 1");
        std::vector<double> r(t.size(), 0.0);
        for (std::size_t p = 1; p < t.size(); ++p)
            r[p] = std::log(t[p]) - std::log(t[p - 1]);
        return WeightSequence(std::move(r), std::nullopt, "custom");
    }
    case SequenceSpec::Kind::modulated: {
        SequenceSpec base = SequenceSpec::gevrey(spec.sigma, p_max);
        const RSequence l = spec.r.materialize(p_max);
        return make_sequence(base).modulate(l);
    }
    }
    throw InvalidArgument("unknown sequence kind");
}

AssociatedValue associated(const WeightSequence& m, double rho)
{
    if (!(rho > 0.0))
        throw InvalidArgument("associated function needs rho > 0");
    const double lr = std::log(rho);
    AssociatedValue best{0.0, 0, false};
    const auto lv = m.log_values();
    for (int p = 1; p <= m.p_max(); ++p) {
        const double v = p * lr - lv[static_cast<std::size_t>(p)];
        if (v > best.value) {
            best.value = v;
            best.argmax = p;
        }
    }
    best.saturated = best.argmax == m.p_max();
    return best;
}

int counting(const WeightSequence& m, double rho)
{
    if (!(rho > 0.0))
        throw InvalidArgument("counting function needs rho > 0");
    const double lr = std::log(rho);
    const double slack = 1e-14 * std::max(1.0, std::abs(lr));
    int n = 0;
    for (int p = 1; p <= m.p_max(); ++p)
        if (m.log_ratio(p) <= lr + slack)
            ++n;
    return n;
}

// ---------------------------------------------------------------------------
// Conditions

const char* to_string(Quasianalyticity q)
{
    switch (q) {
    case Quasianalyticity::quasianalytic: return "quasianalytic";
    case Quasianalyticity::non_quasianalytic: return "non-quasianalytic";
    case Quasianalyticity::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

bool check_m1(const WeightSequence& m)
{
    const auto lv = m.log_values();
    for (int p = 1; p < m.p_max(); ++p) {
        const double second = lv[static_cast<std::size_t>(p - 1)] + lv[static_cast<std::size_t>(p + 1)] -
                              2.0 * lv[static_cast<std::size_t>(p)];
        if (second < -log_slack * (1.0 + std::abs(lv[static_cast<std::size_t>(p)])))
            return false;
    }
    return true;
}

M2Result fit_m2(const WeightSequence& m)
{
    const auto lv = m.log_values();
    const int n_max = m.p_max();
    // excess[n] = max_{0<=p<=n} log(M_n / (M_p M_{n-p}))
    std::vector<double> excess(static_cast<std::size_t>(n_max) + 1, 0.0);
    double best_rate = 0.0;
    for (int n = 1; n <= n_max; ++n) {
        double e = 0.0;
        for (int p = 0; p <= n; ++p)
            e = std::max(e, lv[static_cast<std::size_t>(n)] - lv[static_cast<std::size_t>(p)] -
                                lv[static_cast<std::size_t>(n - p)]);
        excess[static_cast<std::size_t>(n)] = e;
        best_rate = std::max(best_rate, e / n);
    }
    M2Result r;
    const double log_cap = std::log(max_fitted_constant);
    if (best_rate <= log_cap) {
        r.c0 = 1.0;
        r.H = std::exp(best_rate);
        r.holds = true;
    } else {
        r.H = max_fitted_constant;
        double lc = 0.0;
        for (int n = 1; n <= n_max; ++n)
            lc = std::max(lc, excess[static_cast<std::size_t>(n)] - n * log_cap);
        r.c0 = std::exp(lc);
        r.holds = false;
    }
    return r;
}

bool verify_m2(const WeightSequence& m, double c0, double H, int n_max)
{
    n_max = std::min(n_max, m.p_max());
    const auto lv = m.log_values();
    const double lc = std::log(c0), lh = std::log(H);
    for (int n = 0; n <= n_max; ++n)
        for (int p = 0; p <= n; ++p) {
            const double lhs = lv[static_cast<std::size_t>(n)];
            const double rhs = lc + n * lh + lv[static_cast<std::size_t>(p)] + lv[static_cast<std::size_t>(n - p)];
            if (lhs > rhs + log_slack * (1.0 + std::abs(lhs)))
                return false;
        }
    return true;
}

namespace {

constexpr int min_stable_pmax = 10;

// Power-law fit log m_p ~ beta log p + c over the upper three quarters of the table.
struct RatioFit {
    double beta = 0.0;
    double max_rel_residual = 0.0;
};

RatioFit fit_ratios(const WeightSequence& m)
{
    const int p_max = m.p_max();
    const int lo = std::max(2, p_max / 4);
    std::vector<double> x, y;
    for (int p = lo; p <= p_max; ++p) {
        x.push_back(std::log(static_cast<double>(p)));
        y.push_back(m.log_ratio(p));
    }
    const LinearFit f = fit_line(x, y);
    return {f.slope, std::expm1(f.max_abs_residual)};
}

}  // namespace

M5Result check_m5(const WeightSequence& m, int q)
{
    M5Result r;
    r.q = q;
    if (q < 1)
        throw InvalidArgument("(M.5) candidate q must be a positive integer");
    const int p_max = m.p_max();
    if (p_max < min_stable_pmax) {
        r.inconclusive = true;
        return r;
    }
    const RatioFit fit = fit_ratios(m);
    r.tail_exponent = q * fit.beta;
    if (fit.max_rel_residual > 0.1)
        r.inconclusive = true;
    if (!(r.tail_exponent > 1.0 + 1e-3)) {
        r.holds = false;
        r.tail_extrapolation = std::numeric_limits<double>::infinity();
        r.c0 = std::numeric_limits<double>::infinity();
        return r;
    }
    // sum_{j>P} 1/m~_j <= P / ((gamma - 1) m~_P) for m~_j ~ m~_P (j/P)^gamma.
    const double log_mt_last = q * m.log_ratio(p_max);
    r.tail_extrapolation = p_max * std::exp(-log_mt_last) / (r.tail_exponent - 1.0);
    double tail = r.tail_extrapolation;
    double c0 = 1.0;
    for (int p = p_max - 1; p >= 1; --p) {
        tail += std::exp(-q * m.log_ratio(p + 1));
        // sum_{j>p} 1/m~_j <= c0 p / m~_{p+1}
        c0 = std::max(c0, tail * std::exp(q * m.log_ratio(p + 1)) / p);
    }
    r.c0 = c0;
    r.holds = !r.inconclusive;
    return r;
}

M6Result fit_m6(const WeightSequence& a)
{
    const int p_max = a.p_max();
    const int split = (3 * p_max) / 4;
    double head = neg_inf, tail = neg_inf;
    for (int p = 1; p <= p_max; ++p) {
        const double rate = (log_factorial(p) - a.log_value(p)) / p;
        (p < split ? head : tail) = std::max(p < split ? head : tail, rate);
    }
    const double best = std::max(head, tail);
    M6Result r;
    r.c0 = 1.0;
    r.L0 = std::max(1.0, std::exp(best));
    // A rate still climbing in the last quarter signals p! growing faster than L0^p A_p.
    const bool climbing = tail > head + 1e-12 && tail > 0.0;
    r.holds = !climbing && r.L0 <= max_fitted_constant && p_max >= min_stable_pmax;
    if (r.L0 > max_fitted_constant) {
        r.L0 = max_fitted_constant;
        double lc = 0.0;
        for (int p = 1; p <= p_max; ++p)
            lc = std::max(lc, log_factorial(p) - a.log_value(p) - p * std::log(max_fitted_constant));
        r.c0 = std::exp(lc);
    }
    return r;
}

QuasianalyticResult classify_quasianalytic(const WeightSequence& m)
{
    QuasianalyticResult r;
    for (int p = 1; p <= m.p_max(); ++p)
        r.partial_sum += std::exp(-m.log_ratio(p));
    if (m.p_max() < min_stable_pmax)
        return r;
    const RatioFit fit = fit_ratios(m);
    r.fit_exponent = fit.beta;
    r.fit_residual = fit.max_rel_residual;
    if (fit.max_rel_residual > 0.1)
        r.verdict = Quasianalyticity::inconclusive;
    else
        r.verdict = fit.beta <= 1.0 + 1e-3 ? Quasianalyticity::quasianalytic : Quasianalyticity::non_quasianalytic;
    return r;
}

ConditionReport check_conditions(const WeightSequence& m, const WeightSequence& a, const std::vector<int>& q_candidates)
{
    if (m.p_max() != a.p_max())
        throw InvalidArgument("M and A must share p_max");
    ConditionReport r;
    r.p_max = m.p_max();
    if (r.p_max < min_stable_pmax)
        r.notes.push_back("p_max < 10: fitted verdicts are inconclusive");
    r.m1 = check_m1(m);
    r.m2 = fit_m2(m);
    r.a_m1 = check_m1(a);
    r.a_m2 = fit_m2(a);
    r.m6 = fit_m6(a);
    r.quasianalytic = classify_quasianalytic(m);
    bool found = false;
    for (int q : q_candidates) {
        M5Result c = check_m5(m, q);
        r.m5_candidates.push_back(c);
        if (!found) {
            r.m5 = c;
            found = c.holds;
        }
    }
    if (q_candidates.empty())
        r.notes.push_back("no (M.5) candidates supplied");
    return r;
}

std::string to_text(const ConditionReport& r)
{
    std::ostringstream os;
    os << std::setprecision(6);
    os << "p_max            " << r.p_max << '\n';
    os << "(M.1)            " << (r.m1 ? "holds" : "fails") << '\n';
    os << "(M.2)            " << (r.m2.holds ? "holds" : "fails") << "  c0=" << r.m2.c0 << " H=" << r.m2.H << '\n';
    for (const auto& c : r.m5_candidates)
        os << "(M.5) q=" << c.q << "        " << (c.inconclusive ? "inconclusive" : c.holds ? "holds" : "fails")
           << "  c0=" << c.c0 << " exponent=" << c.tail_exponent << '\n';
    os << "(M.6) on A       " << (r.m6.holds ? "holds" : "fails") << "  c0=" << r.m6.c0 << " L0=" << r.m6.L0 << '\n';
    os << "A: (M.1)         " << (r.a_m1 ? "holds" : "fails") << '\n';
    os << "A: (M.2)         " << (r.a_m2.holds ? "holds" : "fails") << "  c0=" << r.a_m2.c0 << " H=" << r.a_m2.H << '\n';
    os << "quasianalyticity " << to_string(r.quasianalytic.verdict) << "  beta=" << r.quasianalytic.fit_exponent
       << " partial_sum=" << r.quasianalytic.partial_sum << '\n';
    for (const auto& n : r.notes)
        os << "note: " << n << '\n';
    return os.str();
}

}  // namespace qk
