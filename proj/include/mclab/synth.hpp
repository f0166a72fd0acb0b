#pragma once

// Synthetic ground truth and observation masks.
//
// All generators draw from std::mt19937_64 seeded with SynthSpec::seed, in a
// fixed order: U (n x r, row by row), V (m x r, row by row), then the noise
// matrix Z (n x m, row by row) when sigma > 0. The coherent variants reuse the
// same draws, so alpha = 0 reproduces gen_lowrank exactly.

#include <cstdint>
#include <string>
#include <string_view>

#include "mclab/core.hpp"

namespace mclab::synth {

enum class Kind { gaussian_lowrank, powerlaw, block_row_coherent };

Kind parse_kind(std::string_view name);
std::string_view kind_name(Kind kind);

struct SynthSpec {
    int n = 0;
    int m = 0;
    int r = 1;
    Kind kind = Kind::gaussian_lowrank;
    double alpha = 0.0;  // power-law exponent or block magnitude
    double sigma = 0.0;  // noise standard deviation
    std::uint64_t seed = 0;

    void validate() const;
};

// U V^T (+ sigma Z), U and V standard Gaussian.
Matrix gen_lowrank(const SynthSpec& spec);
// D (U V^T) D (+ sigma Z) with D_ii = (i+1)^-alpha; needs n == m.
Matrix gen_powerlaw(const SynthSpec& spec);
// (U + alpha [I_r 0; 0 0]) V^T (+ sigma Z).
Matrix gen_block_coherent(const SynthSpec& spec);
// Dispatches on spec.kind.
Matrix generate(const SynthSpec& spec);

// Each entry independently with probability p_obs in (0, 1].
IndexSet mask_mcar(int n, int m, double p_obs, std::uint64_t seed);

// round(C r n ln(n)^2), clamped to [1, n^2].
long long theoretical_budget(int n, int r, double C);

// Exactly `budget` distinct entries, uniformly without replacement.
IndexSet mask_budget(int n, int m, long long budget, std::uint64_t seed);

// Entry (i,j) kept with probability proportional to
// (1 - (i+1)/(2n)) (1 - (j+1)/(2m)), scaled so the expected size is
// p_obs n m. Probabilities that would exceed 1 are clamped to 1.
IndexSet mask_topleft_biased(int n, int m, double p_obs, std::uint64_t seed);
double topleft_inclusion_probability(int i, int j, int n, int m, double p_obs);

}  // namespace mclab::synth
