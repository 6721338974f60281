#pragma once

#include "qk/test_function.hpp"
#include "qk/ultrapoly.hpp"

#include <string>
#include <utility>
#include <vector>

namespace qk {

enum class Verdict { exists, fails, inconclusive };
const char* to_string(Verdict v);

enum class ProbeStatus { integrable, non_integrable, inconclusive };
const char* to_string(ProbeStatus s);

struct ProbePair {
    TestFunction phi;
    TestFunction psi;
};

// Gaussians of varied center and scale plus two Hermite-weighted ones, paired off.
std::vector<ProbePair> default_probe_pairs();

struct ProbeRecord {
    std::string phi;
    std::string psi;
    double product_integral = 0.0;  // int h over the last box
    double abs_integral = 0.0;      // int |h| over the last box
    double tail_exponent = 0.0;     // slope of log|h| against |x| on the outer quarter; -inf when h underflows there
    double tail_residual = 0.0;     // rms fit residual relative to max(1, mean |log|h||)
    bool integrable = false;
    ProbeStatus status = ProbeStatus::inconclusive;
    double box = 0.0;
    int doublings = 0;
    bool agreed = false;  // int |h| agreed to 1% between the last two boxes
    std::string reason;
    std::vector<std::pair<double, double>> tail;  // (|x|, log|h|) samples used by the fit
};

struct ConvolvabilityReport {
    std::string f1;
    std::string f2;
    std::vector<ProbeRecord> probes;
    Verdict verdict = Verdict::inconclusive;
    std::vector<int> witnesses;  // probes certified non-integrable
};

struct CriterionOptions {
    double start_box = 4.0;
    int points_per_unit = 16;
    int max_doublings = 8;
    double agreement = 0.01;
    double tail_fraction = 0.25;
    double integrable_slope = -0.05;
    double fit_tolerance = 0.05;
};

// Tests (phi * reflect(f1)) (psi * f2) in L^1 for every probe pair. A finite battery can
// refute convolvability or support it, never prove it.
ConvolvabilityReport criterion_iv(const TestFunction& f1, const TestFunction& f2, const std::vector<ProbePair>& probes,
                                  const CriterionOptions& opts = {});

struct PairOptions {
    // Skip the convolvability screen. A divergent pairing still throws.
    bool acknowledge = false;
    const ConvolvabilityReport* report = nullptr;  // reused instead of rerunning criterion_iv
};

// <f1 * f2, phi> = iint f1(x) f2(y) phi(x + y) dx dy as an iterated integral, with point
// masses and constants reduced exactly. Throws InvalidArgument when the pair is not known
// to be convolvable and the caller did not acknowledge, Divergence when the integral diverges.
double pair_value(const TestFunction& f1, const TestFunction& f2, const TestFunction& phi,
                  const PairOptions& opts = {});

struct InterchangeRow {
    std::string phi;
    double commutativity = 0.0;  // |<f1 * f2, phi> - <f2 * f1, phi>|
    double on_test = 0.0;        // <f1 * f2, P(-D) phi>
    double on_f2 = 0.0;          // <f1 * P(D) f2, phi>
    double on_f1 = 0.0;          // <P(D) f1 * f2, phi>, when f1 is a function with a Fourier oracle
    bool has_on_f1 = false;
    double spectral = 0.0;  // (2 pi)^{-1} int P f1^ f2^ phi^(-xi) dxi
    bool has_spectral = false;
    double interchange = 0.0;  // largest pairwise gap among the computed routes
    double scale = 0.0;
};

struct AlgebraReport {
    std::string f1;
    std::string f2;
    std::string multiplier;
    std::vector<InterchangeRow> rows;
    double max_commutativity = 0.0;
    double max_interchange = 0.0;
    bool pass = false;  // every residual within 1e-5 of its row scale
};

AlgebraReport algebra_checks(const TestFunction& f1, const TestFunction& f2, const Multiplier& P,
                             const std::vector<TestFunction>& phis, const PairOptions& opts = {});

}  // namespace qk
