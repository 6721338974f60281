// One PASS/FAIL line per acceptance criterion, each with its wall time and time limit.

#include "qk/cli.hpp"
#include "qk/convolution.hpp"
#include "qk/gs_spaces.hpp"
#include "qk/parametrix.hpp"
#include "qk/ultrapoly.hpp"
#include "qk/weight_sequences.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>

using namespace qk;
using TF = TestFunction;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
        }
    }
    void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string sci(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

int failures = 0;

void criterion(int id, const char* name, double limit_s, const std::function<Outcome()>& body)
{
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail = std::string("exception: ") + e.what();
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (dt >= limit_s) {
        o.pass = false;
        o.note("over time limit");
    }
    if (!o.pass)
        ++failures;
    std::printf("criterion %2d %-34s %s  %7.2f s (limit %g s)  %s\n", id, name, o.pass ? "PASS" : "FAIL", dt, limit_s,
                o.detail.c_str());
    std::fflush(stdout);
}

const WeightSequence& fact()
{
    static const WeightSequence m = make_sequence(SequenceSpec::factorial(256));
    return m;
}

const Ultrapolynomial& desk_poly()
{
    static const Ultrapolynomial P = [] {
        UltrapolyParams p;
        p.mode = J0Mode::relaxed;
        p.q = 2;
        p.k = 1.0;
        p.rprime = 2.0;
        p.H = 2.0;
        return Ultrapolynomial::build(fact(), p);
    }();
    return P;
}

const KernelGrid& desk_kernel()
{
    static const KernelGrid G = build_kernel(desk_poly());
    return G;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Outcome condition_suite()
{
    Outcome o;
    const double sigmas[] = {0.5, 1.0, 2.0};
    const Quasianalyticity expected[] = {Quasianalyticity::quasianalytic, Quasianalyticity::quasianalytic,
                                         Quasianalyticity::non_quasianalytic};
    for (int i = 0; i < 3; ++i) {
        const double s = sigmas[i];
        const auto M = make_sequence(SequenceSpec::gevrey(s, 256));
        const std::string tag = "sigma=" + sci(s);
        o.require(check_m1(M), tag + " M.1");
        const auto m2 = fit_m2(M);
        o.require(m2.holds && m2.c0 == 1.0, tag + " M.2 fit");
        o.require(m2.H <= std::pow(2.0, s) * (1.0 + 1e-12), tag + " H <= 2^sigma");
        o.require(verify_m2(M, 1.0, std::pow(2.0, s), 60), tag + " M.2 exhaustive p+q<=60");
        o.require(classify_quasianalytic(M).verdict == expected[i], tag + " quasianalyticity");
    }
    if (o.pass)
        o.note("M.1, M.2 (c0=1, H<=2^sigma) and verdicts q/q/nq for sigma 0.5/1/2");
    return o;
}

Outcome associated_identity()
{
    Outcome o;
    double worst = 0.0;
    for (int q : {2, 3}) {
        const auto Mq = fact().power(q);
        for (double rho : {0.5, 1.0, 2.0, 5.0, 10.0, 50.0}) {
            const auto m = associated(fact(), rho);
            const auto mt = associated(Mq, std::pow(rho, q));
            o.require(!m.saturated && !mt.saturated, "unsaturated sup at rho=" + sci(rho));
            const double rel = std::abs(mt.value - q * m.value) / (1.0 + m.value);
            worst = std::max(worst, rel);
        }
    }
    o.require(worst <= 1e-10, "residual " + sci(worst));
    o.note("max |M~(rho^q) - q M(rho)| / (1 + M) = " + sci(worst));
    return o;
}

Outcome subordinate_property()
{
    Outcome o;
    std::mt19937_64 rng(20240611);
    auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    double worst = -std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> v;
        double k = 0.5 + 1.5 * uniform();
        for (int p = 1; p <= 64; ++p) {
            if (p > 1)
                k += 3.0 * std::pow(uniform(), 3);
            v.push_back(k);
        }
        const auto ks = RSequence::from_values(v);
        const auto kp = subordinate(ks);
        for (int p = 1; p <= 64; ++p)
            o.require(kp[p] <= ks[p], "k' <= k");
        for (int s = 0; s <= 60; ++s)
            for (int p = 0; p <= s; ++p)
                worst = std::max(worst, kp.log_product(s) - s * std::log(2.0) - kp.log_product(p) - kp.log_product(s - p));
    }
    o.require(worst <= 1e-12, "product bound");
    o.note("20 sequences, max log excess " + sci(worst));
    return o;
}

Outcome ultrapolynomial()
{
    Outcome o;
    const auto& P = desk_poly();
    const auto s = strip_check(P, {50.0, 2001, 9});
    int off_axis = 0;
    for (const auto& v : s.violations) {
        o.require(v.y != 0.0, "zero on the real grid at x=" + sci(v.x));
        o.require(std::abs(v.y) > s.zero_free_halfwidth, "zero inside the zero-free band at y=" + sci(v.y));
        ++off_axis;
    }
    o.require(s.min_abs_real == 1.0 && s.argmin_real == 0.0, "min |P| = 1 at 0");
    o.require(s.c_prime > 0.0, "C' > 0");
    double worst = 0.0;
    for (int x = 0; x <= 10; ++x)
        for (int n = 0; n <= 20; ++n) {
            const auto d = inv_derivative(P, x, n, 2.0);
            o.require(std::isfinite(d.bound_ratio), "finite bound ratio");
            worst = std::max(worst, d.bound_ratio);
        }
    o.note("j0=" + std::to_string(P.j0()) + ", C'=" + sci(s.c_prime) + ", max bound ratio " + sci(worst) + ", " +
           std::to_string(off_axis) + " near-zero points beyond |y|=" + sci(s.zero_free_halfwidth));
    return o;
}

Outcome parametrix_delta()
{
    Outcome o;
    const auto& G = desk_kernel();
    double worst = 0.0, gap = 0.0;
    for (const auto& phi : {TF::gaussian(0, 1), TF::gaussian(2, 1), 0.5 * TF::hermite(1, 1.0)}) {
        const auto c = verify_delta(G, phi);
        worst = std::max(worst, c.residual);
        gap = std::max(gap, c.route_gap);
    }
    o.require(worst <= 1e-6, "delta residual");
    o.require(gap <= 1e-7, "route agreement");
    const double mass = kernel_mass(G);
    o.require(std::abs(mass - 1.0) <= 1e-8, "int G = 1");
    const auto pc = parseval_check(G);
    o.require(pc.rel_diff <= 1e-8, "Parseval");
    o.note("residual " + sci(worst) + ", gap " + sci(gap) + ", |int G - 1| " + sci(std::abs(mass - 1.0)) +
           ", Parseval " + sci(pc.rel_diff));
    return o;
}

Outcome decay()
{
    Outcome o;
    const auto fit = verify_decay(desk_kernel(), fact(), 0.25, 6, 6);
    o.require(fit.table.size() == 49, "49 table entries");
    for (const auto& e : fit.table)
        o.require(std::isfinite(e.C), "finite C");
    o.require(std::isfinite(fit.sigma_t), "finite sigma_t");
    o.require(!fit.saturated, "unsaturated");
    o.note("max C " + sci(fit.max_C) + ", sigma_t " + sci(fit.sigma_t));
    return o;
}

Outcome weierstrass()
{
    Outcome o;
    const auto r = solve_weierstrass(desk_kernel(), {0.5, 3, 1.0, 12, 1.0}, {-4.0, 4.0});
    const auto e = solve_cosine(desk_kernel(), 3.0 * pi, {-4.0, 4.0});
    o.require(r.residual <= 1e-4, "Weierstrass residual");
    o.require(e.residual <= 1e-10, "eigenfunction residual");
    o.note("residual " + sci(r.residual) + ", eigenfunction " + sci(e.residual));
    return o;
}

Outcome regularization()
{
    Outcome o;
    const auto r =
        regularize_report(TF::gaussian(0.3, 1.0), default_mollifier(), TF::gaussian(0, 1), fact(), fact(), 0.25);
    o.require(r.monotone_within_noise, "decrease within factor-2 noise");
    std::string ladder;
    for (const auto& row : r.rows)
        ladder += (ladder.empty() ? "" : " ") + sci(row.distance);
    o.note(std::string(r.strictly_decreasing ? "strictly decreasing" : "decreasing within noise") + ": " + ladder);
    return o;
}

Outcome convolution_battery()
{
    Outcome o;
    const auto probes = default_probe_pairs();
    const auto g = TF::gaussian(0, 1);
    o.require(criterion_iv(g, g, probes).verdict == Verdict::exists, "(gaussian, gaussian) exists");
    o.require(criterion_iv(TF::constant(1), g, probes).verdict == Verdict::exists, "(const, gaussian) exists");
    o.require(criterion_iv(TF::constant(1), TF::constant(1), probes).verdict == Verdict::fails, "(const, const) fails");

    const double ggg = pair_value(g, g, g);
    const double cgg = pair_value(TF::constant(1), g, g);
    o.require(std::abs(ggg - pi / std::sqrt(3.0)) <= 1e-8 * (pi / std::sqrt(3.0)), "gaussian oracle");
    o.require(std::abs(cgg - pi) <= 1e-8 * pi, "constant oracle");
    o.require(pair_value(TF::delta(0), TF::delta(0), g) == 1.0, "delta oracle");

    const auto P = Multiplier::from(desk_poly());
    const auto phi = TF::gaussian(0.5, 2);
    double worst = 0.0;
    auto check = [&](const AlgebraReport& r) {
        for (const auto& row : r.rows) {
            o.require(row.commutativity <= 1e-5 * row.scale, "commutativity");
            o.require(row.interchange <= 1e-5 * row.scale, "interchange");
            worst = std::max({worst, row.commutativity / row.scale, row.interchange / row.scale});
        }
    };
    check(algebra_checks(TF::gaussian(0.3, 2), TF::gaussian(0, 2), P, {phi}));
    check(algebra_checks(TF::delta(0), TF::gaussian(0, 2), P, {phi}));
    check(algebra_checks(g, TF::gaussian(0.5, 0.8), Multiplier::identity(), {g}));
    o.note("verdicts exists/exists/fails, oracle errors " + sci(std::abs(ggg - pi / std::sqrt(3.0))) + " and " +
           sci(std::abs(cgg - pi)) + ", worst relative algebra residual " + sci(worst));
    return o;
}

Outcome reproducibility()
{
    Outcome o;
    const fs::path dir = fs::temp_directory_path() / "qk_acceptance_records";
    fs::remove_all(dir);
    setenv("QK_OUTPUT_DIR", dir.c_str(), 1);
    const std::vector<std::vector<std::string>> suite = {
        {"seq", "check", "--gevrey", "1", "--pmax", "256", "--q", "2"},
        {"seq", "assoc", "--power", "2"},
        {"seq", "subordinate", "--random", "20"},
        {"upoly", "build"},
        {"upoly", "strip"},
        {"upoly", "invderiv", "--x", "0,5,10"},
        {"param", "build"},
        {"param", "decay"},
        {"param", "delta", "--phi", "gaussian(0,1)"},
        {"param", "weier"},
        {"gs", "seminorm", "--phi", "gaussian(0,1)"},
        {"gs", "member", "--f", "expdecay(1)"},
        {"gs", "regularize"},
        {"conv", "check", "--f1", "const(1)", "--f2", "const(1)"},
        {"conv", "value", "--f1", "gaussian(0,1)", "--f2", "gaussian(0,1)"},
        {"conv", "algebra", "--f1", "delta(0,1)", "--f2", "gaussian(0,2)"},
    };
    std::ostringstream sink;
    std::vector<std::string> first;
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < suite.size(); ++i) {
            const int code = run_cli(suite[i], sink, sink);
            o.require(code == exit_ok, suite[i][0] + " " + suite[i][1] + " exit " + std::to_string(code));
            std::string bytes;
            for (const auto& entry : fs::directory_iterator(dir)) {
                const auto name = entry.path().filename().string();
                if (name.rfind(suite[i][0] + "-" + suite[i][1], 0) == 0 &&
                    name.find(".stamp.") == std::string::npos)
                    bytes += name + "\n" + slurp(entry.path());
            }
            if (pass == 0)
                first.push_back(bytes);
            else
                o.require(bytes == first[i], suite[i][0] + " " + suite[i][1] + " differs between runs");
        }
    }
    o.note(std::to_string(suite.size()) + " commands run twice, records and CSV files compared byte for byte");
    return o;
}

}  // namespace

int main()
{
    criterion(1, "condition suite", 1.0, condition_suite);
    criterion(2, "associated-function identity", 1.0, associated_identity);
    criterion(3, "subordinate-sequence property", 1.0, subordinate_property);
    criterion(4, "ultrapolynomial (relaxed desk case)", 30.0, ultrapolynomial);
    criterion(5, "parametrix delta test", 60.0, parametrix_delta);
    criterion(6, "decay and sigma_t", 60.0, decay);
    criterion(7, "Weierstrass example", 120.0, weierstrass);
    criterion(8, "regularization", 30.0, regularization);
    criterion(9, "convolution battery", 120.0, convolution_battery);
    criterion(10, "reproducibility", 600.0, reproducibility);
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
