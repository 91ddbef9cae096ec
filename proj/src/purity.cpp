#include "bpl/purity.hpp"

namespace bpl {

void validate(const PurityParams& p) {
    if (!(p.p_trigger > 0.0 && p.p_trigger <= 1.0))
        throw schema_error("purity: p_trigger must lie in (0, 1]");
    if (!(p.p_partner > 0.0 && p.p_partner <= 1.0))
        throw schema_error("purity: p_partner must lie in (0, 1]");
}

double apply_purity_cross(double g_ideal, const PurityParams& p) {
    validate(p);
    if (!(g_ideal >= 1.0))
        throw schema_error("apply_purity_cross: ideal cross-correlation must be >= 1");
    return p.p_trigger * p.p_partner * (g_ideal - 1.0) + 1.0;
}

double invert_purity_cross(double g_measured, const PurityParams& p) {
    validate(p);
    if (!(g_measured >= 1.0))
        throw schema_error("invert_purity_cross: measured cross-correlation must be >= 1");
    return 1.0 + (g_measured - 1.0) / (p.p_trigger * p.p_partner);
}

double apply_purity_conditional(double g_ideal_cross, const PurityParams& p) {
    validate(p);
    if (!(g_ideal_cross >= 1.0))
        throw schema_error("apply_purity_conditional: ideal cross-correlation must be >= 1");
    const double pt = p.p_trigger, pp = p.p_partner;
    const double gm1 = g_ideal_cross - 1.0;
    const double num = 1.0 + pp * pp + 2.0 * pt * pp * (1.0 + pp) * gm1;
    const double den = pt * pp * gm1 + 1.0;
    return num / (den * den);
}

double estimate_purity(uint64_t total_counts, uint64_t background_counts) {
    if (total_counts == 0)
        throw schema_error("estimate_purity: total count must be positive");
    if (background_counts > total_counts)
        throw schema_error("estimate_purity: background exceeds total");
    return static_cast<double>(total_counts - background_counts) /
           static_cast<double>(total_counts);
}

}  // namespace bpl
