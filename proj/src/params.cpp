#include "dryfric/params.hpp"

namespace dryfric {

double reference_theta0() {
    static const double v = detail::solve_theta0<double>();
    return v;
}

DegenerateRegime classify_degenerate(const Params& p) {
    if (p.q >= p.a + 2 * p.b) return DegenerateRegime::EventualStop;
    if (p.q <= 2 * p.b) return DegenerateRegime::EternalProgression;
    if (2 * p.b >= p.a) return DegenerateRegime::NoFreePhase;
    return DegenerateRegime::None;
}

std::string degenerate_name(DegenerateRegime r) {
    switch (r) {
        case DegenerateRegime::EventualStop: return "eventual stop regime";
        case DegenerateRegime::EternalProgression: return "eternal progression";
        case DegenerateRegime::NoFreePhase: return "no free phase (2b >= a)";
        default: return "none";
    }
}

} // namespace dryfric
