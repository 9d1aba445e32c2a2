#pragma once

namespace symfr {

// One record for every numerical threshold. Defaults are the documented ones;
// the CLI exposes overrides through --tol-<name>.
struct Tolerances {
    double unitary = 1e-10;     // ||U*U - 1||
    double herm = 1e-12;        // ||H - H*||
    double skew = 1e-10;        // ||S + S^t||
    double unit_modulus = 1e-10;
    double resolvent = 1e-6;    // distance of a branch cut from the spectrum
    double transport = 1e-7;    // intertwining residual of accepted lines
    double degeneracy = 1e-6;   // eigenphase gaps below this are degenerate
    double degree = 1e-6;       // rounding residual of winding numbers
    double integer = 1e-3;      // pre-rounding residual of Z2 indices
    int max_halvings = 6;
};

inline const Tolerances& default_tolerances() {
    static const Tolerances t{};
    return t;
}

}  // namespace symfr
