#pragma once

#include "qk/parametrix.hpp"
#include "qk/ultrapoly.hpp"
#include "qk/weight_sequences.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace qk {

struct Tolerances {
    double delta = 1e-6;     // verify_delta residual
    double route = 1e-7;     // agreement of the two delta routes
    double weier = 1e-4;     // Weierstrass sup-residual
    double pair = 1e-8;      // pair_value against closed forms
    double algebra = 1e-5;   // commutativity / interchange, relative to scale
};

// Flat key=value configuration. Keys carry a section prefix: seq.*, upoly.*, grid.*, tol.*,
// plus output.dir and seed. Lines starting with '#' are comments.
struct RunConfig {
    SequenceSpec seq = SequenceSpec::factorial(256);
    UltrapolyParams upoly = desk_params();
    KernelGridSpec grid;
    double grid_tol = 1e-10;
    Tolerances tol;
    std::string output_dir = "results";
    std::uint64_t seed = 1;

    static UltrapolyParams desk_params();

    // Overlays the text on the defaults. Throws ConfigError on unknown keys or bad values.
    static RunConfig parse(const std::string& text);
    static RunConfig load(const std::string& path);

    void set(const std::string& key, const std::string& value);

    // Every key with its resolved value, in a fixed order.
    std::vector<std::pair<std::string, std::string>> entries() const;
    std::string to_kv() const;
};

}  // namespace qk
