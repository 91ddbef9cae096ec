#pragma once

#include <cstdint>

#include "bpl/errors.hpp"

namespace bpl {

// Channel purity: the fraction of detected counts that come from genuine
// pair emission rather than background (dark counts, leakage, conversion
// noise). p_trigger applies to the heralding channel, p_partner to the
// heralded channel (the probe before conversion, the telecom signal after).
struct PurityParams {
    double p_trigger = 1.0;
    double p_partner = 1.0;
};

void validate(const PurityParams& p);

// Forward map from the ideal cross-correlation to the one measured through
// impure channels: P_t * P_p * (g - 1) + 1. The accidental floor g = 1 is a
// fixed point; correlations are scaled down by the product purity.
double apply_purity_cross(double g_ideal, const PurityParams& p);

// Algebraic inverse of apply_purity_cross: 1 + (g_measured - 1)/(P_t * P_p).
double invert_purity_cross(double g_measured, const PurityParams& p);

// Heralded autocorrelation measured through impure channels, as a function
// of the *ideal* cross-correlation g:
//
//            1 + P_p^2 + 2 P_t P_p (1 + P_p)(g - 1)
//   g_c =   ----------------------------------------
//                 [P_t P_p (g - 1) + 1]^2
//
// The three numerator pieces are background-background bunching (P_p^2),
// trigger-partner accidentals, and the genuine triple term. At unit purity
// this reduces exactly to eval_conditional_autocorr(g).
double apply_purity_conditional(double g_ideal_cross, const PurityParams& p);

// Purity from a counting experiment: (total - background) / total.
double estimate_purity(uint64_t total_counts, uint64_t background_counts);

}  // namespace bpl
