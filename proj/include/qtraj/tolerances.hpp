#pragma once

namespace qtraj {

// Numerical tolerances used throughout the library. Defaults are sized for
// double-precision dense eigensolves at small dimension (d <= 16); every
// entry can be overridden per run (the CLI reads them from the scenario
// file).
struct Tolerances {
    double herm = 1e-10;         // max-norm Hermiticity check
    double unit = 1e-10;         // max-norm unitarity check, |.|=1 checks
    double psd = 1e-10;          // eigenvalues below -psd reject a state
    double recon = 1e-9;         // reconstruction / identity contracts
    double rank = 1e-12;         // eigenvalues below this count as singular
    double zero_overlap = 1e-12; // overlap moduli at or below are "zero"
    double complete = 1e-10;     // Kraus completeness sum check
};

} // namespace qtraj
