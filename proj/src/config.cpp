#include "qk/config.hpp"

#include "qk/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace qk {

namespace {

std::string num(double v) { return format_number(v); }

double parse_double(const std::string& key, const std::string& v)
{
    double out = 0.0;
    const char* e = v.data() + v.size();
    const auto r = std::from_chars(v.data(), e, out);
    if (v.empty() || r.ec != std::errc() || r.ptr != e || !std::isfinite(out))
        throw ConfigError("config key '" + key + "' needs a number, got '" + v + "'");
    return out;
}

int parse_int(const std::string& key, const std::string& v)
{
    const double d = parse_double(key, v);
    if (d != std::floor(d) || std::abs(d) > 1e9)
        throw ConfigError("config key '" + key + "' needs an integer, got '" + v + "'");
    return static_cast<int>(d);
}

double parse_positive(const std::string& key, const std::string& v)
{
    const double d = parse_double(key, v);
    if (!(d > 0.0))
        throw ConfigError("config key '" + key + "' must be positive, got '" + v + "'");
    return d;
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::map<std::string, std::string> kv_map(const std::string& text)
{
    std::map<std::string, std::string> m;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos)
            m[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return m;
}

// Applies several seq.* keys at once so a generator change and its parameters land together.
SequenceSpec apply_seq(const SequenceSpec& current, const std::vector<std::pair<std::string, std::string>>& keys)
{
    auto m = kv_map(current.to_kv());
    for (const auto& [k, v] : keys) {
        if (k == "generator") {
            m.erase("sigma");
            m.erase("values");
            m.erase("r");
            if (v == "custom")
                m.erase("pmax");
        }
    }
    for (const auto& [k, v] : keys)
        m[k] = v;
    std::string text;
    for (const auto& [k, v] : m)
        text += k + "=" + v + "\n";
    try {
        auto spec = SequenceSpec::from_kv(text);
        (void)make_sequence(spec);
        return spec;
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("seq: ") + e.what());
    }
}

}  // namespace

UltrapolyParams RunConfig::desk_params()
{
    UltrapolyParams p;
    p.H = 2.0;
    return p;
}

void RunConfig::set(const std::string& key, const std::string& value)
{
    if (key.rfind("seq.", 0) == 0) {
        seq = apply_seq(seq, {{key.substr(4), value}});
        return;
    }
    if (key == "upoly.flavor") {
        if (value == "beurling")
            upoly.flavor = Flavor::beurling;
        else if (value == "roumieu")
            upoly.flavor = Flavor::roumieu;
        else
            throw ConfigError("upoly.flavor must be beurling or roumieu, got '" + value + "'");
    } else if (key == "upoly.mode") {
        if (value == "relaxed")
            upoly.mode = J0Mode::relaxed;
        else if (value == "strict")
            upoly.mode = J0Mode::strict;
        else
            throw ConfigError("upoly.mode must be relaxed or strict, got '" + value + "'");
    } else if (key == "upoly.q") {
        upoly.q = parse_int(key, value);
        if (upoly.q < 2)
            throw ConfigError("upoly.q must be at least 2");
    } else if (key == "upoly.k") {
        upoly.k = parse_positive(key, value);
    } else if (key == "upoly.kseq") {
        try {
            upoly.k_seq = RSpec::parse(value);
        } catch (const InvalidArgument& e) {
            throw ConfigError(std::string("upoly.kseq: ") + e.what());
        }
    } else if (key == "upoly.rprime") {
        upoly.rprime = parse_double(key, value);
        if (!(upoly.rprime >= 1.0))
            throw ConfigError("upoly.rprime must be at least 1");
    } else if (key == "upoly.H") {
        if (value == "fit")
            upoly.H.reset();
        else
            upoly.H = parse_positive(key, value);
    } else if (key == "upoly.box") {
        upoly.box = parse_positive(key, value);
    } else if (key == "grid.xmax") {
        grid.x_max = parse_positive(key, value);
    } else if (key == "grid.n") {
        grid.n = parse_int(key, value);
        if (grid.n < 4 || (grid.n & (grid.n - 1)) != 0)
            throw ConfigError("grid.n must be a power of two >= 4");
    } else if (key == "grid.tol") {
        grid_tol = parse_positive(key, value);
    } else if (key == "tol.delta") {
        tol.delta = parse_positive(key, value);
    } else if (key == "tol.route") {
        tol.route = parse_positive(key, value);
    } else if (key == "tol.weier") {
        tol.weier = parse_positive(key, value);
    } else if (key == "tol.pair") {
        tol.pair = parse_positive(key, value);
    } else if (key == "tol.algebra") {
        tol.algebra = parse_positive(key, value);
    } else if (key == "output.dir") {
        if (value.empty())
            throw ConfigError("output.dir must not be empty");
        output_dir = value;
    } else if (key == "seed") {
        const int s = parse_int(key, value);
        if (s < 0)
            throw ConfigError("seed must be nonnegative");
        seed = static_cast<std::uint64_t>(s);
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

RunConfig RunConfig::parse(const std::string& text)
{
    RunConfig c;
    std::vector<std::pair<std::string, std::string>> seq_keys;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#')
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + " has no '='");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.rfind("seq.", 0) == 0)
            seq_keys.emplace_back(key.substr(4), value);
        else
            c.set(key, value);
    }
    if (!seq_keys.empty())
        c.seq = apply_seq(c.seq, seq_keys);
    return c;
}

RunConfig RunConfig::load(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return parse(os.str());
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const
{
    std::vector<std::pair<std::string, std::string>> out;
    std::istringstream is(seq.to_kv());
    std::string line;
    while (std::getline(is, line)) {
        const auto eq = line.find('=');
        out.emplace_back("seq." + line.substr(0, eq), line.substr(eq + 1));
    }
    out.emplace_back("upoly.flavor", to_string(upoly.flavor));
    out.emplace_back("upoly.mode", to_string(upoly.mode));
    out.emplace_back("upoly.q", std::to_string(upoly.q));
    if (upoly.flavor == Flavor::beurling)
        out.emplace_back("upoly.k", num(upoly.k));
    else
        out.emplace_back("upoly.kseq", upoly.k_seq.to_string());
    out.emplace_back("upoly.rprime", num(upoly.rprime));
    out.emplace_back("upoly.H", upoly.H ? num(*upoly.H) : "fit");
    out.emplace_back("upoly.box", num(upoly.box));
    out.emplace_back("grid.xmax", num(grid.x_max));
    out.emplace_back("grid.n", std::to_string(grid.n));
    out.emplace_back("grid.tol", num(grid_tol));
    out.emplace_back("tol.delta", num(tol.delta));
    out.emplace_back("tol.route", num(tol.route));
    out.emplace_back("tol.weier", num(tol.weier));
    out.emplace_back("tol.pair", num(tol.pair));
    out.emplace_back("tol.algebra", num(tol.algebra));
    out.emplace_back("output.dir", output_dir);
    out.emplace_back("seed", std::to_string(seed));
    return out;
}

std::string RunConfig::to_kv() const
{
    std::string out;
    for (const auto& [k, v] : entries())
        out += k + "=" + v + "\n";
    return out;
}

}  // namespace qk
