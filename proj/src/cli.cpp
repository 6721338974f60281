#include "qk/cli.hpp"

#include "qk/config.hpp"
#include "qk/convolution.hpp"
#include "qk/errors.hpp"
#include "qk/expr.hpp"
#include "qk/gs_spaces.hpp"
#include "qk/parametrix.hpp"
#include "qk/ultrapoly.hpp"
#include "qk/weight_sequences.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

namespace qk {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

json jnum(double v)
{
    if (std::isfinite(v))
        return v;
    if (std::isnan(v))
        return "nan";
    return v > 0 ? "inf" : "-inf";
}

json jnums(const std::vector<double>& v)
{
    json a = json::array();
    for (double x : v)
        a.push_back(jnum(x));
    return a;
}

std::string num(double v) { return format_number(v); }

// Everything the flags can carry; each command reads its own subset.
struct Flags {
    std::string config_path;
    std::vector<std::string> sets;
    std::string tag;

    std::optional<double> gevrey;
    std::optional<int> pmax;
    std::vector<int> q_list;
    std::vector<double> rho = {0.5, 1, 2, 5, 10, 50};
    int power = 0;
    std::string k_spec;
    int random = 0;
    int length = 64;

    std::optional<std::string> mode;
    std::optional<int> q;
    std::optional<double> k;
    std::optional<double> rprime;
    std::optional<std::string> H;
    double strip_xmax = 20.0;
    int nx = 1001;
    int ny = 9;
    std::vector<double> xs = {0, 1, 2, 5, 10};
    int n = 20;
    double radius = 2.0;

    std::optional<double> xmax;
    std::optional<int> grid_n;
    std::optional<double> tol;
    double t = 0.25;
    int alpha = 6;
    int beta = 6;
    std::string phi = "gaussian(0,1)";
    double a = 0.5;
    int b = 3;
    double tau = 1.0;
    int terms = 12;
    double r = 1.0;
    double lo = -4.0;
    double hi = 4.0;
    double omega = 3.0 * pi;

    double h = 0.25;
    std::string roumieu;
    int alpha_cap = 60;
    int reg_alpha_cap = 10;
    std::string f = "delta(0,1)";
    std::string psi = "gaussian(0.3,1)";
    std::string chi;
    std::string cutoff = "gaussian(0,1)";

    std::string f1 = "gaussian(0,1)";
    std::string f2 = "gaussian(0,1)";
    std::vector<std::string> phis;
    bool acknowledge = false;
    bool identity = false;
};

struct Record {
    std::string stem;
    json inputs = json::object();
    json result = json::object();
    std::vector<std::pair<std::string, std::string>> side_files;  // (suffix, content)
    std::string headline;
};

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

RunConfig resolve_config(const Flags& fl, const std::vector<std::pair<std::string, std::string>>& flag_keys)
{
    std::string text;
    if (!fl.config_path.empty())
        text = read_file(fl.config_path) + "\n";
    for (const auto& s : fl.sets) {
        if (s.find('=') == std::string::npos)
            throw ConfigError("--set needs key=value, got '" + s + "'");
        text += s + "\n";
    }
    for (const auto& [k, v] : flag_keys)
        text += k + "=" + v + "\n";
    RunConfig cfg = RunConfig::parse(text);
    if (const char* env = std::getenv("QK_OUTPUT_DIR"); env && *env)
        cfg.set("output.dir", env);
    return cfg;
}

void write_text(const fs::path& path, const std::string& content)
{
    std::ofstream o(path, std::ios::binary | std::ios::trunc);
    if (!o)
        throw std::runtime_error("cannot write " + path.string());
    o << content;
}

std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json config_json(const RunConfig& cfg)
{
    json c = json::object();
    for (const auto& [k, v] : cfg.entries())
        c[k] = v;
    return c;
}

fs::path persist(const RunConfig& cfg, const std::string& command, const Record& rec, const json* error,
                 double elapsed_s)
{
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    json j = json::object();
    j["command"] = command;
    j["status"] = error ? "error" : "ok";
    j["config"] = config_json(cfg);
    j["inputs"] = rec.inputs;
    if (error) {
        j["error"] = *error;
    } else {
        j["result"] = rec.result;
        json files = json::array();
        for (const auto& [suffix, content] : rec.side_files) {
            const std::string name = rec.stem + suffix;
            write_text(dir / name, content);
            files.push_back(name);
        }
        j["artifacts"] = files;
    }
    const fs::path path = dir / (rec.stem + ".json");
    write_text(path, j.dump(2) + "\n");
    json stamp = {{"record", rec.stem + ".json"}, {"timestamp", utc_timestamp()}, {"elapsed_s", elapsed_s}};
    write_text(dir / (rec.stem + ".stamp.json"), stamp.dump(2) + "\n");
    return path;
}

// ---------------------------------------------------------------------------
// Commands

WeightSequence base_sequence(const RunConfig& cfg) { return make_sequence(cfg.seq); }

Ultrapolynomial build_poly(const RunConfig& cfg) { return Ultrapolynomial::build(base_sequence(cfg), cfg.upoly); }

json kv_json(const std::string& kv)
{
    json o = json::object();
    std::istringstream is(kv);
    std::string line;
    while (std::getline(is, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos)
            o[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return o;
}

json m2_json(const M2Result& m) { return {{"holds", m.holds}, {"c0", jnum(m.c0)}, {"H", jnum(m.H)}}; }

json m5_json(const M5Result& m)
{
    return {{"q", m.q},
            {"c0", jnum(m.c0)},
            {"holds", m.holds},
            {"inconclusive", m.inconclusive},
            {"tail_exponent", jnum(m.tail_exponent)},
            {"tail_extrapolation", jnum(m.tail_extrapolation)}};
}

void cmd_seq_check(const RunConfig& cfg, const Flags& fl, Record& rec)
{
    const auto M = base_sequence(cfg);
    const std::vector<int> qs = fl.q_list.empty() ? std::vector<int>{2, 3} : fl.q_list;
    rec.inputs["q"] = qs;
    const auto r = check_conditions(M, M, qs);
    json res;
    res["p_max"] = r.p_max;
    res["m1"] = r.m1;
    res["m2"] = m2_json(r.m2);
    res["m2_verified_p_plus_q_le_60"] = r.m2.holds && verify_m2(M, r.m2.c0, r.m2.H, std::min(60, r.p_max));
    res["m5"] = m5_json(r.m5);
    json cands = json::array();
    for (const auto& c : r.m5_candidates)
        cands.push_back(m5_json(c));
    res["m5_candidates"] = cands;
    res["m6"] = {{"c0", jnum(r.m6.c0)}, {"L0", jnum(r.m6.L0)}, {"holds", r.m6.holds}};
    res["quasianalytic"] = {{"verdict", to_string(r.quasianalytic.verdict)},
                            {"partial_sum", jnum(r.quasianalytic.partial_sum)},
                            {"fit_exponent", jnum(r.quasianalytic.fit_exponent)},
                            {"fit_residual", jnum(r.quasianalytic.fit_residual)}};
    res["a_m1"] = r.a_m1;
    res["a_m2"] = m2_json(r.a_m2);
    res["notes"] = r.notes;
    rec.result = res;
    rec.headline = std::string("M.1 ") + (r.m1 ? "holds" : "fails") + ", " + to_string(r.quasianalytic.verdict);
}

void cmd_seq_assoc(const RunConfig& cfg, const Flags& fl, Record& rec)
{
    const auto M = base_sequence(cfg);
    rec.inputs["rho"] = jnums(fl.rho);
    rec.inputs["power"] = fl.power;
    json rows = json::array();
    double worst = 0.0;
    for (double rho : fl.rho) {
        if (!(rho > 0.0))
            throw InvalidArgument("rho values must be positive");
        const auto v = associated(M, rho);
        json row = {{"rho", rho}, {"M", jnum(v.value)}, {"argmax", v.argmax}, {"saturated", v.saturated}};
        if (fl.power > 0) {
            const auto t = associated(M.power(fl.power), std::pow(rho, fl.power));
            const double residual = std::abs(t.value - fl.power * v.value);
            row["M_power_at_rho_q"] = jnum(t.value);
            row["power_saturated"] = t.saturated;
            row["identity_residual"] = jnum(residual);
            worst = std::max(worst, residual / (1.0 + v.value));
        }
        rows.push_back(row);
    }
    rec.result["rows"] = rows;
    if (fl.power > 0)
        rec.result["max_relative_residual"] = jnum(worst);
    rec.headline = std::to_string(fl.rho.size()) + " values";
}

RSequence random_sequence(std::mt19937_64& rng, int length)
{
    auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    std::vector<double> v;
    double k = 0.5 + 1.5 * uniform();
    v.push_back(k);
    for (int p = 2; p <= length; ++p) {
        const double u = uniform();
        k += 3.0 * u * u * u;
        v.push_back(k);
    }
    if (v.back() <= v.front())
        v.back() = v.front() + 1.0;
    return RSequence::from_values(std::move(v));
}

void cmd_seq_subordinate(const RunConfig& cfg, const Flags& fl, Record& rec)
{
    std::vector<RSequence> ks;
    if (fl.random > 0) {
        rec.inputs["random"] = fl.random;
        rec.inputs["seed"] = cfg.seed;
        std::mt19937_64 rng(cfg.seed);
        for (int i = 0; i < fl.random; ++i)
            ks.push_back(random_sequence(rng, fl.length));
    } else {
        const std::string spec = fl.k_spec.empty() ? "linear" : fl.k_spec;
        rec.inputs["k"] = spec;
        ks.push_back(RSpec::parse(spec).materialize(fl.length));
    }
    rec.inputs["length"] = fl.length;
    const int n_max = std::min(60, fl.length);
    json rows = json::array();
    bool all = true;
    for (const auto& k : ks) {
        const auto kp = subordinate(k);
        bool bounded = true;
        for (int p = 1; p <= k.size(); ++p)
            bounded = bounded && kp[p] <= k[p];
        double worst = -std::numeric_limits<double>::infinity();
        for (int s = 0; s <= n_max; ++s)
            for (int p = 0; p <= s; ++p)
                worst = std::max(worst, kp.log_product(s) - s * std::log(2.0) - kp.log_product(p) - kp.log_product(s - p));
        const bool ok = bounded && worst <= 1e-12;
        all = all && ok;
        rows.push_back({{"k", jnums(std::vector<double>(k.values().begin(), k.values().end()))},
                        {"k_prime", jnums(std::vector<double>(kp.values().begin(), kp.values().end()))},
                        {"bounded_by_k", bounded},
                        {"max_log_excess", jnum(worst)},
                        {"holds", ok}});
    }
    rec.result["sequences"] = rows;
    rec.result["all_hold"] = all;
    rec.headline = all ? "all sequences satisfy the product bound" : "product bound violated";
}

void cmd_upoly_build(const RunConfig& cfg, const Flags&, Record& rec)
{
    const auto P = build_poly(cfg);
    json res;
    res["header"] = kv_json(P.to_kv());
    res["j0"] = P.j0();
    res["H"] = jnum(P.H());
    res["l"] = jnum(P.l());
    res["zero_free_halfwidth"] = jnum(P.zero_free_halfwidth());
    json samples = json::array();
    for (double x : {0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0})
        samples.push_back({{"x", x}, {"log_abs", jnum(P.log_abs_real(x))}, {"truncation", P.truncation(x)}});
    res["real_samples"] = samples;
    const auto z = P.log_evaluate(cplx(3.0, 1.5));
    res["sample_3_plus_1.5i"] = {{"log_abs", jnum(z.log_abs)}, {"arg", jnum(z.arg)}};
    res["notes"] = P.notes();
    rec.result = res;
    rec.headline = "j0=" + std::to_string(P.j0()) + " l=" + num(P.l());
}

void cmd_upoly_strip(const RunConfig& cfg, const Flags& fl, Record& rec)
{
    const auto P = build_poly(cfg);
    StripGrid g{fl.strip_xmax, fl.nx, fl.ny};
    rec.inputs["x_max"] = fl.strip_xmax;
    rec.inputs["nx"] = fl.nx;
    rec.inputs["ny"] = fl.ny;
    const auto s = strip_check(P, g);
    json res;
    res["y_max"] = jnum(s.y_max);
    res["min_abs_real"] = jnum(s.min_abs_real);
    res["argmin_real"] = jnum(s.argmin_real);
    res["min_strip"] = {{"x", s.min_strip.x}, {"y", s.min_strip.y}, {"log_abs", jnum(s.min_strip.log_abs)}};
    res["c_prime"] = jnum(s.c_prime);
    res["weight_saturated"] = s.weight_saturated;
    res["zero_free_halfwidth"] = jnum(s.zero_free_halfwidth);
    res["strip_reduced"] = s.strip_reduced;
    json zs = json::array();
    for (const auto& z : s.zeros_in_window)
        zs.push_back({jnum(z.real()), jnum(z.imag())});
    res["zeros_in_window"] = zs;
    res["violations"] = s.violations.size();
    rec.result = res;
    std::string csv = "x,log_abs,log_ratio\n";
    for (const auto& row : s.rows)
        csv += num(row.x) + "," + num(row.log_abs) + "," + num(row.log_ratio) + "\n";
    rec.side_files.emplace_back(".csv", csv);
    rec.headline = "min |P| on the real grid = " + num(s.min_abs_real) + ", C' = " + num(s.c_prime);
}

void cmd_upoly_invderiv(const RunConfig& cfg, const Flags& fl, Record& rec)
{
    const auto P = build_poly(cfg);
    rec.inputs["x"] = jnums(fl.xs);
    rec.inputs["n_max"] = fl.n;
    rec.inputs["radius"] = fl.radius;
    json rows = json::array();
    double worst = 0.0;
    bool finite = true;
    for (double x : fl.xs) {
        for (int n = 0; n <= fl.n; ++n) {
            const auto d = inv_derivative(P, x, n, fl.radius);
            finite = finite && std::isfinite(d.bound_ratio);
            worst = std::max(worst, d.bound_ratio);
            rows.push_back({{"x", x}, {"n", n}, {"value", jnum(d.value)}, {"bound_ratio", jnum(d.bound_ratio)},
                            {"nodes", d.nodes}});
        }
    }
    rec.result["rows"] = rows;
    rec.result["max_bound_ratio"] = jnum(worst);
    rec.result["all_finite"] = finite;
    rec.headline = "max bound ratio " + num(worst);
}

KernelGrid kernel(const RunConfig& cfg) { return build_kernel(build_poly(cfg), cfg.grid, cfg.grid_tol); }

void cmd_param_build(const RunConfig& cfg, const Flags&, Record& rec)
{
    const auto G = kernel(cfg);
    const auto pc = parseval_check(G);
    json res;
    res["method"] = G.method;
    res["dx"] = G.dx;
    res["dxi"] = G.dxi;
    res["K"] = G.K;
    res["xi_max"] = G.xi_max;
    res["tail_bound"] = jnum(G.tail_bound);
    res["mass"] = jnum(kernel_mass(G));
    res["parseval"] = {{"spatial", jnum(pc.spatial)}, {"spectral", jnum(pc.spectral)}, {"rel_diff", jnum(pc.rel_diff)}};
    rec.result = res;
    rec.side_files.emplace_back(".csv", kernel_csv(G));
    rec.headline = "K=" + std::to_string(G.K) + " mass=" + num(kernel_mass(G));
}

void cmd_param_decay(const RunConfig& cfg, const Flags& fl, Record& rec)
{
    const auto G = kernel(cfg);
    rec.inputs["t"] = fl.t;
    rec.inputs["alpha_cap"] = fl.alpha;
    rec.inputs["beta_cap"] = fl.beta;
    const auto fit = verify_decay(G, base_sequence(cfg), fl.t, fl.alpha, fl.beta);
    json table = json::array();
    for (const auto& e : fit.table)
        table.push_back({{"alpha", e.alpha}, {"beta", e.beta}, {"C", jnum(e.C)}, {"x_at", e.x_at}});
    json res;
    res["table"] = table;
    res["max_C"] = jnum(fit.max_C);
    res["sigma_t"] = jnum(fit.sigma_t);
    res["sigma_alpha"] = fit.sigma_alpha;
    res["sigma_x"] = fit.sigma_x;
    res["sigma_alpha_cap"] = fit.sigma_alpha_cap;
    res["saturated"] = fit.saturated;
    res["pass"] = fit.pass;
    rec.result = res;
    rec.headline = "sigma_t=" + num(fit.sigma_t) + (fit.saturated ? " (saturated)" : "");
}

void cmd_param_delta(const RunConfig& cfg, const Flags& fl, Record& rec)
{
    const auto phi = parse_function(fl.phi);
    rec.inputs["phi"] = phi.to_string();
    const auto c = verify_delta(kernel(cfg), phi);
    json res;
    res["spectral"] = jnum(c.spectral);
    res["spatial"] = jnum(c.spatial);
    res["target"] = jnum(c.target);
    res["residual"] = jnum(c.residual);
    res["route_gap"] = jnum(c.route_gap);
    res["band"] = c.band;
    res["pass"] = c.residual <= cfg.tol.delta && c.route_gap <= cfg.tol.route;
    rec.result = res;
    rec.headline = "residual " + num(c.residual) + ", route gap " + num(c.route_gap);
}

void cmd_param_weier(const RunConfig& cfg, const Flags& fl, Record& rec)
{
    const auto G = kernel(cfg);
    WeierstrassParams w{fl.a, fl.b, fl.tau, fl.terms, fl.r};
    rec.inputs["a"] = fl.a;
    rec.inputs["b"] = fl.b;
    rec.inputs["tau"] = fl.tau;
    rec.inputs["terms"] = fl.terms;
    rec.inputs["r"] = fl.r;
    rec.inputs["window"] = {fl.lo, fl.hi};
    rec.inputs["omega"] = fl.omega;
    const auto s = solve_weierstrass(G, w, {fl.lo, fl.hi});
    const auto e = solve_cosine(G, fl.omega, {fl.lo, fl.hi});
    json res;
    res["residual"] = jnum(s.residual);
    res["decay_fit"] = jnum(s.decay_fit);
    res["decay_argmax_k"] = s.decay_argmax_k;
    res["mass_outside"] = jnum(s.mass_outside);
    res["fft_size"] = s.fft_size;
    res["symbol_band"] = s.symbol_band;
    res["pass"] = s.residual <= cfg.tol.weier;
    res["cosine"] = {{"coefficient", jnum(e.coefficient)}, {"residual", jnum(e.residual)}};
    rec.result = res;
    std::string csv = "x,f,g,pdf\n";
    for (std::size_t i = 0; i < s.xs.size(); ++i)
        csv += num(s.xs[i]) + "," + num(s.f[i]) + "," + num(s.g[i]) + "," + num(s.pdf[i]) + "\n";
    rec.side_files.emplace_back(".csv", csv);
    rec.headline = "sup residual " + num(s.residual);
}

json seminorm_json(const SeminormValue& s)
{
    return {{"value", jnum(s.value)},   {"infinite", s.infinite},     {"reason", s.reason},
            {"alpha_at", s.alpha_at},   {"x_at", s.x_at},             {"alpha_cap", s.alpha_cap},
            {"x_box", s.x_box},         {"expansions", s.expansions}, {"saturated", s.saturated},
            {"per_alpha", jnums(s.per_alpha)}};
}

void cmd_gs_seminorm(const RunConfig& cfg, const Flags& fl, Record& rec)
{
    const auto phi = parse_function(fl.phi);
    const auto M = base_sequence(cfg);
    rec.inputs["phi"] = phi.to_string();
    rec.inputs["alpha_cap"] = fl.alpha_cap;
    SeminormOptions o;
    o.alpha_cap = fl.alpha_cap;
    SeminormWeight w;
    if (!fl.roumieu.empty()) {
        rec.inputs["roumieu"] = fl.roumieu;
        w = SeminormWeight::roumieu(RSpec::parse(fl.roumieu).materialize(M.p_max()));
    } else {
        rec.inputs["h"] = fl.h;
        w = SeminormWeight::beurling(fl.h);
    }
    const auto s = seminorm(phi, M, M, w, o);
    rec.result = seminorm_json(s);
    rec.headline = "seminorm " + num(s.value);
}

json growth_json(const GrowthFit& g)
{
    json rows = json::array();
    for (const auto& r : g.rows)
        rows.push_back({{"t", r.t}, {"C", jnum(r.C)}, {"x_at", r.x_at}, {"x_box", r.x_box}, {"reason", r.reason}});
    return {{"found", g.found}, {"t", g.t}, {"C", jnum(g.C)}, {"x_at", g.x_at}, {"rows", rows}};
}

void cmd_gs_member(const RunConfig& cfg, const Flags& fl, Record& rec)
{
    const auto f = parse_function(fl.f);
    rec.inputs["f"] = f.to_string();
    const auto r = membership_test(f, base_sequence(cfg), default_probes());
    json fits = json::array();
    for (const auto& g : r.fits)
        fits.push_back(growth_json(g));
    rec.result = {{"verdict", to_string(r.verdict)},
                  {"t_uniform", r.t_uniform},
                  {"witness", r.witness},
                  {"probes", r.probes},
                  {"fits", fits}};
    rec.headline = to_string(r.verdict);
}

void cmd_gs_regularize(const RunConfig& cfg, const Flags& fl, Record& rec)
{
    const auto psi = parse_function(fl.psi);
    const auto chi = fl.chi.empty() ? default_mollifier() : parse_function(fl.chi);
    const auto cutoff = parse_function(fl.cutoff);
    const auto M = base_sequence(cfg);
    rec.inputs["psi"] = psi.to_string();
    rec.inputs["chi"] = chi.to_string();
    rec.inputs["cutoff"] = cutoff.to_string();
    rec.inputs["h"] = fl.h;
    rec.inputs["alpha_cap"] = fl.reg_alpha_cap;
    const auto r = regularize_report(psi, chi, cutoff, M, M, fl.h, {1, 2, 4, 8, 16}, fl.reg_alpha_cap);
    json rows = json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"n", row.n},
                        {"distance", jnum(row.distance)},
                        {"saturated", row.saturated},
                        {"point_error", jnum(row.point_error)}});
    rec.result = {{"rows", rows},
                  {"strictly_decreasing", r.strictly_decreasing},
                  {"monotone_within_noise", r.monotone_within_noise}};
    rec.headline = r.strictly_decreasing ? "distance strictly decreasing" : "distance not strictly decreasing";
}

json report_json(const ConvolvabilityReport& r)
{
    json probes = json::array();
    for (const auto& p : r.probes) {
        std::string csv = "abs_x,log_abs_h\n";
        for (const auto& [x, y] : p.tail)
            csv += num(x) + "," + num(y) + "\n";
        probes.push_back({{"phi", p.phi},
                          {"psi", p.psi},
                          {"status", to_string(p.status)},
                          {"product_integral", jnum(p.product_integral)},
                          {"abs_integral", jnum(p.abs_integral)},
                          {"tail_exponent", jnum(p.tail_exponent)},
                          {"tail_residual", jnum(p.tail_residual)},
                          {"integrable", p.integrable},
                          {"agreed", p.agreed},
                          {"box", p.box},
                          {"doublings", p.doublings},
                          {"reason", p.reason},
                          {"tail_csv", csv}});
    }
    return {{"f1", r.f1}, {"f2", r.f2}, {"verdict", to_string(r.verdict)}, {"witnesses", r.witnesses},
            {"probes", probes}};
}

void cmd_conv_check(const RunConfig&, const Flags& fl, Record& rec)
{
    const auto f1 = parse_function(fl.f1);
    const auto f2 = parse_function(fl.f2);
    rec.inputs["f1"] = f1.to_string();
    rec.inputs["f2"] = f2.to_string();
    const auto r = criterion_iv(f1, f2, default_probe_pairs());
    rec.result = report_json(r);
    rec.headline = std::string("verdict ") + to_string(r.verdict);
}

void cmd_conv_value(const RunConfig&, const Flags& fl, Record& rec)
{
    const auto f1 = parse_function(fl.f1);
    const auto f2 = parse_function(fl.f2);
    const auto phi = parse_function(fl.phi);
    rec.inputs["f1"] = f1.to_string();
    rec.inputs["f2"] = f2.to_string();
    rec.inputs["phi"] = phi.to_string();
    rec.inputs["acknowledge"] = fl.acknowledge;
    PairOptions o;
    o.acknowledge = fl.acknowledge;
    std::optional<ConvolvabilityReport> screened;
    if (!fl.acknowledge) {
        screened = criterion_iv(f1, f2, default_probe_pairs());
        o.report = &*screened;
        rec.result["verdict"] = to_string(screened->verdict);
    }
    const double v = pair_value(f1, f2, phi, o);
    rec.result["value"] = jnum(v);
    rec.headline = "value " + num(v);
}

void cmd_conv_algebra(const RunConfig& cfg, const Flags& fl, Record& rec)
{
    const auto f1 = parse_function(fl.f1);
    const auto f2 = parse_function(fl.f2);
    std::vector<TestFunction> phis;
    for (const auto& s : fl.phis.empty() ? std::vector<std::string>{"gaussian(0.5,2)"} : fl.phis)
        phis.push_back(parse_function(s));
    rec.inputs["f1"] = f1.to_string();
    rec.inputs["f2"] = f2.to_string();
    json ph = json::array();
    for (const auto& p : phis)
        ph.push_back(p.to_string());
    rec.inputs["phi"] = ph;
    rec.inputs["identity"] = fl.identity;
    const Multiplier P = fl.identity ? Multiplier::identity() : Multiplier::from(build_poly(cfg));
    const auto r = algebra_checks(f1, f2, P, phis);
    json rows = json::array();
    bool pass = true;
    for (const auto& row : r.rows) {
        json j = {{"phi", row.phi},
                  {"commutativity", jnum(row.commutativity)},
                  {"on_test", jnum(row.on_test)},
                  {"on_f2", jnum(row.on_f2)}};
        if (row.has_on_f1)
            j["on_f1"] = jnum(row.on_f1);
        if (row.has_spectral)
            j["spectral"] = jnum(row.spectral);
        j["interchange"] = jnum(row.interchange);
        j["scale"] = jnum(row.scale);
        rows.push_back(j);
        pass = pass && row.commutativity <= cfg.tol.algebra * row.scale && row.interchange <= cfg.tol.algebra * row.scale;
    }
    rec.result = {{"multiplier", r.multiplier},
                  {"rows", rows},
                  {"max_commutativity", jnum(r.max_commutativity)},
                  {"max_interchange", jnum(r.max_interchange)},
                  {"pass", pass}};
    rec.headline = "max interchange " + num(r.max_interchange);
}

using Handler = std::function<void(const RunConfig&, const Flags&, Record&)>;

struct Leaf {
    std::string group;
    std::string name;
    CLI::App* app = nullptr;
    Handler run;
    std::function<std::vector<std::pair<std::string, std::string>>(const Flags&)> config_keys;
};

void add_common(CLI::App* app, Flags& fl)
{
    app->add_option("--config", fl.config_path, "key=value config file");
    app->add_option("--set", fl.sets, "override a config key (key=value)");
    app->add_option("--tag", fl.tag, "suffix for the output file names");
}

std::vector<std::pair<std::string, std::string>> upoly_keys(const Flags& fl)
{
    std::vector<std::pair<std::string, std::string>> k;
    if (fl.mode)
        k.emplace_back("upoly.mode", *fl.mode);
    if (fl.q)
        k.emplace_back("upoly.q", std::to_string(*fl.q));
    if (fl.k)
        k.emplace_back("upoly.k", num(*fl.k));
    if (fl.rprime)
        k.emplace_back("upoly.rprime", num(*fl.rprime));
    if (fl.H)
        k.emplace_back("upoly.H", *fl.H);
    return k;
}

std::vector<std::pair<std::string, std::string>> grid_keys(const Flags& fl)
{
    auto k = upoly_keys(fl);
    if (fl.xmax)
        k.emplace_back("grid.xmax", num(*fl.xmax));
    if (fl.grid_n)
        k.emplace_back("grid.n", std::to_string(*fl.grid_n));
    if (fl.tol)
        k.emplace_back("grid.tol", num(*fl.tol));
    return k;
}

void add_upoly_flags(CLI::App* app, Flags& fl)
{
    app->add_option("--mode", fl.mode, "relaxed or strict j0 rule");
    app->add_option("--q", fl.q, "factor exponent q");
    app->add_option("--k", fl.k, "Beurling decay target k");
    app->add_option("--rprime", fl.rprime, "strip half-width r'");
    app->add_option("--H", fl.H, "(M.2) constant, or 'fit'");
}

void add_grid_flags(CLI::App* app, Flags& fl)
{
    add_upoly_flags(app, fl);
    app->add_option("--xmax", fl.xmax, "kernel grid half-width");
    app->add_option("--n", fl.grid_n, "kernel grid size (power of two)");
    app->add_option("--tol", fl.tol, "kernel truncation tolerance");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    Flags fl;
    CLI::App app{"Ultrapolynomial, parametrix and convolution toolkit", "qk"};
    // -h stays free for the seminorm scale.
    app.set_help_flag("--help", "print help");
    app.require_subcommand(1);
    std::vector<Leaf> leaves;
    auto none = [](const Flags&) { return std::vector<std::pair<std::string, std::string>>{}; };

    auto* seq = app.add_subcommand("seq", "weight sequences")->require_subcommand(1);
    auto* upoly = app.add_subcommand("upoly", "ultrapolynomials")->require_subcommand(1);
    auto* param = app.add_subcommand("param", "parametrix kernel")->require_subcommand(1);
    auto* gs = app.add_subcommand("gs", "Gelfand-Shilov tests")->require_subcommand(1);
    auto* conv = app.add_subcommand("conv", "convolution")->require_subcommand(1);

    auto seq_keys = [](const Flags& f) {
        std::vector<std::pair<std::string, std::string>> k;
        if (f.gevrey) {
            k.emplace_back("seq.generator", "gevrey");
            k.emplace_back("seq.sigma", num(*f.gevrey));
        }
        if (f.pmax)
            k.emplace_back("seq.pmax", std::to_string(*f.pmax));
        return k;
    };
    {
        auto* c = seq->add_subcommand("check", "condition report for M_p");
        c->add_option("--gevrey", fl.gevrey, "use M_p = p!^sigma");
        c->add_option("--pmax", fl.pmax, "table length");
        c->add_option("--q", fl.q_list, "(M.5) powers to try");
        leaves.push_back({"seq", "check", c, cmd_seq_check, seq_keys});

        auto* a = seq->add_subcommand("assoc", "associated function values");
        a->add_option("--gevrey", fl.gevrey, "use M_p = p!^sigma");
        a->add_option("--pmax", fl.pmax, "table length");
        a->add_option("--rho", fl.rho, "evaluation points")->delimiter(',');
        a->add_option("--power", fl.power, "also check the identity for M_p^q with this q");
        leaves.push_back({"seq", "assoc", a, cmd_seq_assoc, seq_keys});

        auto* s = seq->add_subcommand("subordinate", "subordinate sequence k'");
        s->add_option("--k", fl.k_spec, "r-sequence spec (linear, log1p, power:e, values:...)");
        s->add_option("--random", fl.random, "number of random nondecreasing sequences (uses seed)");
        s->add_option("--length", fl.length, "terms per sequence");
        leaves.push_back({"seq", "subordinate", s, cmd_seq_subordinate, none});
    }
    {
        auto* b = upoly->add_subcommand("build", "construct P and report its parameters");
        add_upoly_flags(b, fl);
        leaves.push_back({"upoly", "build", b, cmd_upoly_build, upoly_keys});

        auto* s = upoly->add_subcommand("strip", "zero-freeness and lower bound on a grid");
        add_upoly_flags(s, fl);
        s->add_option("--x-max", fl.strip_xmax, "real half-width of the grid");
        s->add_option("--nx", fl.nx, "points along the real axis");
        s->add_option("--ny", fl.ny, "rows across the strip");
        leaves.push_back({"upoly", "strip", s, cmd_upoly_strip, upoly_keys});

        auto* d = upoly->add_subcommand("invderiv", "derivatives of 1/P by Cauchy integrals");
        add_upoly_flags(d, fl);
        d->add_option("--x", fl.xs, "points")->delimiter(',');
        d->add_option("--nmax", fl.n, "highest derivative");
        d->add_option("--radius", fl.radius, "contour radius");
        leaves.push_back({"upoly", "invderiv", d, cmd_upoly_invderiv, upoly_keys});
    }
    {
        auto* b = param->add_subcommand("build", "kernel grid G");
        add_grid_flags(b, fl);
        leaves.push_back({"param", "build", b, cmd_param_build, grid_keys});

        auto* d = param->add_subcommand("decay", "weighted derivative bounds of G");
        add_grid_flags(d, fl);
        d->add_option("--t", fl.t, "weight scale t");
        d->add_option("--alpha", fl.alpha, "highest alpha");
        d->add_option("--beta", fl.beta, "highest beta");
        leaves.push_back({"param", "decay", d, cmd_param_decay, grid_keys});

        auto* e = param->add_subcommand("delta", "P(D)G = delta against a test function");
        add_grid_flags(e, fl);
        e->add_option("--phi", fl.phi, "test function expression");
        leaves.push_back({"param", "delta", e, cmd_param_delta, grid_keys});

        auto* w = param->add_subcommand("weier", "solve P(D) f = damped Weierstrass function");
        add_grid_flags(w, fl);
        w->add_option("--a", fl.a, "amplitude ratio");
        w->add_option("--b", fl.b, "odd frequency ratio");
        w->add_option("--tau", fl.tau, "damping");
        w->add_option("--terms", fl.terms, "number of cosine terms");
        w->add_option("--r", fl.r, "derivative scale in the decay fit");
        w->add_option("--lo", fl.lo, "window start");
        w->add_option("--hi", fl.hi, "window end");
        w->add_option("--omega", fl.omega, "frequency of the single-cosine sanity case");
        leaves.push_back({"param", "weier", w, cmd_param_weier, grid_keys});
    }
    {
        auto* s = gs->add_subcommand("seminorm", "weighted derivative seminorm");
        s->add_option("--phi", fl.phi, "function expression");
        s->add_option("--h", fl.h, "Beurling scale h");
        s->add_option("--roumieu", fl.roumieu, "Roumieu r-sequence spec instead of h");
        s->add_option("--alpha-cap", fl.alpha_cap, "highest derivative");
        leaves.push_back({"gs", "seminorm", s, cmd_gs_seminorm, none});

        auto* m = gs->add_subcommand("member", "growth test against Gaussian probes");
        m->add_option("--f", fl.f, "function expression");
        leaves.push_back({"gs", "member", m, cmd_gs_member, none});

        auto* r = gs->add_subcommand("regularize", "distance ladder of the regularization operators");
        r->add_option("--psi", fl.psi, "function to regularize");
        r->add_option("--chi", fl.chi, "mollifier with integral 1 (default: normalized Gaussian, scale 0.15)");
        r->add_option("--cutoff", fl.cutoff, "cutoff with value 1 at 0");
        r->add_option("--h", fl.h, "Beurling scale h");
        r->add_option("--alpha-cap", fl.reg_alpha_cap, "highest derivative in the distance");
        leaves.push_back({"gs", "regularize", r, cmd_gs_regularize, none});
    }
    {
        auto* c = conv->add_subcommand("check", "criterion (iv) probe battery");
        c->add_option("--f1", fl.f1, "first factor");
        c->add_option("--f2", fl.f2, "second factor");
        leaves.push_back({"conv", "check", c, cmd_conv_check, none});

        auto* v = conv->add_subcommand("value", "<f1 * f2, phi>");
        v->add_option("--f1", fl.f1, "first factor");
        v->add_option("--f2", fl.f2, "second factor");
        v->add_option("--phi", fl.phi, "test function");
        v->add_flag("--acknowledge", fl.acknowledge, "evaluate even without an 'exists' verdict");
        leaves.push_back({"conv", "value", v, cmd_conv_value, none});

        auto* a = conv->add_subcommand("algebra", "commutativity and P(D) interchange");
        add_upoly_flags(a, fl);
        a->add_option("--f1", fl.f1, "first factor");
        a->add_option("--f2", fl.f2, "second factor (smooth)");
        a->add_option("--phi", fl.phis, "test functions");
        a->add_flag("--identity", fl.identity, "use the identity multiplier");
        leaves.push_back({"conv", "algebra", a, cmd_conv_algebra, upoly_keys});
    }
    for (auto& leaf : leaves)
        add_common(leaf.app, fl);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return exit_usage_error;
    }

    const Leaf* chosen = nullptr;
    for (const auto& leaf : leaves)
        if (leaf.app->parsed())
            chosen = &leaf;
    if (!chosen) {
        err << "usage error: no command selected\n";
        return exit_usage_error;
    }
    const std::string command = chosen->group + " " + chosen->name;

    RunConfig cfg;
    try {
        cfg = resolve_config(fl, chosen->config_keys(fl));
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_usage_error;
    }

    Record rec;
    rec.stem = chosen->group + "-" + chosen->name + (fl.tag.empty() ? "" : "-" + fl.tag);
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };
    try {
        chosen->run(cfg, fl, rec);
    } catch (const ParseError& e) {
        err << "expression error [" << to_string(e.failure) << "]: " << e.what() << "\n";
        return exit_usage_error;
    } catch (const Error& e) {
        const json error = {{"code", to_string(e.code())}, {"message", e.what()}};
        try {
            const auto path = persist(cfg, command, rec, &error, elapsed());
            err << rec.stem << ": " << to_string(e.code()) << ": " << e.what() << " -> " << path.string() << "\n";
        } catch (const std::exception& w) {
            err << rec.stem << ": " << e.what() << " (record not written: " << w.what() << ")\n";
        }
        return exit_domain_error;
    }
    try {
        const auto path = persist(cfg, command, rec, nullptr, elapsed());
        out << rec.stem << ": " << rec.headline << " -> " << path.string() << "\n";
    } catch (const std::exception& e) {
        err << rec.stem << ": cannot write results: " << e.what() << "\n";
        return exit_domain_error;
    }
    return exit_ok;
}

}  // namespace qk
