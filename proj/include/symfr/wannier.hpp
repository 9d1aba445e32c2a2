#pragma once
// Wannier functions of a periodic Bloch frame by the discrete inverse
// Bloch-Floquet sum w_a(R) = (1/|grid|) sum_k e^{2 pi i k.R} Xi_a(k).

#include <limits>
#include <vector>

#include "symfr/frames1d.hpp"

namespace symfr {

struct Cell {
    int r1 = 0;
    int r2 = 0;
};

struct DecayFit {
    double slope = 0.0;      // d log||w(R)|| / d|R|; -inf when the tail vanishes
    double intercept = 0.0;
    double r2 = 1.0;
    double stderr_slope = 0.0;
    int shells = 0;          // shells entering the fit
    double floor = 0.0;      // smallest shell norm seen in the fit range
};

struct WannierSet {
    int dim = 1;
    int radius = 0;
    int n1 = 0, n2 = 0;  // source grid
    int N = 0, m = 0;
    std::vector<Cell> cells;            // |r_i| <= radius, r2 = 0 for d = 1
    std::vector<std::vector<CVec>> w;   // w[a][cell]
    std::vector<DecayFit> decay;        // filled by decay_fit
    double parseval = 0.0;              // max_a |sum over the full period of ||w_a||^2 - 1|
    double window_weight = 0.0;         // min_a sum over the window of ||w_a||^2
    bool trs_paired = false;            // the source frame was symmetric

    int cell_index(int r1, int r2 = 0) const;  // -1 outside the window
};

// Needs a periodic frame and radius <= n_i / 4; AliasingError otherwise.
WannierSet synthesize(const FrameField& frame, int radius, Exec exec = Exec::parallel);

// max |<w_a(. - n), w_b> - delta_ab delta_n0| over |n_i| <= shift, summed over the window
double translated_orthonormality(const WannierSet& w, int shift = 3);

// Least squares of log max_{|R|_inf = s} ||w_a(R)|| against s on 2 <= s <= radius - 1.
// LocalizationFailure unless the slope is negative by more than two standard errors.
std::vector<DecayFit> decay_fit(WannierSet& w);

// max_b || w_b - sum_a (theta w_a) eps_ab ||
double trs_pairing_check(const WannierSet& w, const TimeReversal& theta);

}  // namespace symfr
