#pragma once
// Two-dimensional frames. The k1 = 0 line carries a 1-d symmetric frame;
// transport along k1 closes up to the matching family alpha(k2), and a
// rotation beta(k1, k2) built from a good logarithm of (an approximant of)
// alpha repairs periodicity, and time reversal when the index allows it.

#include <functional>
#include <string>
#include <vector>

#include "symfr/frames1d.hpp"

namespace symfr {

// ---- matching family --------------------------------------------------------

struct MatchingFamily {
    int n2 = 0;
    CMat eps;
    std::vector<CMat> alpha;           // k2 = j / n2, j in [0, n2)
    std::function<CMat(double)> eval;  // off-grid values; empty when not available

    int m() const { return static_cast<int>(eps.rows()); }
    int wrap(int j) const { return ((j % n2) + n2) % n2; }
    int neg(int j) const { return wrap(-j); }
    double k2(int j) const { return static_cast<double>(j) / n2; }
    const CMat& at(int j) const { return alpha[static_cast<std::size_t>(wrap(j))]; }
};

MatchingFamily constant_family(const CMat& value, const CMat& eps, int n2);

struct MatchingChecks {
    double jump = 0.0;          // max node-to-node ||alpha(j+1) - alpha(j)||
    double trs = 0.0;           // max ||eps alpha(k) - alpha(-k)^t eps||
    double kramers_zero = 0.0;  // pairing defect of the eigenphases at 0
    double kramers_half = 0.0;  // and at 1/2
    double unitarity = 0.0;
    double det_even = 0.0;      // max |det alpha(k) - det alpha(-k)|
};
MatchingChecks check_matching(const MatchingFamily& a);

// The k1 = 0 frame, the transports T_{k2}(k1, 0) for k1 in [0, 1] at every
// k2 node, and alpha(k2) = Xi(0,k2)^* T_{k2}(1,0) Xi(0,k2).
struct BaseLine {
    Frame1d base;
    std::vector<TransportLine> lines;
    MatchingFamily alpha;
    int n1 = 0;
};
BaseLine matching_family(const ProjectorFamily& p, const TransportOptions& opt = {}, Exec exec = Exec::parallel,
                         const Tolerances& tol = default_tolerances());

// ---- eigenphase curves ------------------------------------------------------

// Continuous labels on [0, 1/2]: phase[j](i) for j = 0..n2/2, unwrapped along j.
// At j = 0 the labels follow increasing order in [lo, lo + 2 pi).
struct EigenCurves {
    int n2 = 0;
    std::vector<RVec> phase;
    int refined_steps = 0;
    int nodes() const { return static_cast<int>(phase.size()); }
};
EigenCurves track_eigenphases(const MatchingFamily& a, double lo, const Tolerances& tol = default_tolerances());
EigenCurves track_eigenphases(const MatchingFamily& a, const Tolerances& tol = default_tolerances());

// Intersections of a probe graph (one real per node on [0, 1/2]) with the
// curves, counted modulo the 2 pi identification.
struct CrossingCount {
    int count = 0;
    double clearance = 0.0;  // min distance of the probe from any curve at a node
};
CrossingCount count_crossings(const EigenCurves& c, const std::vector<double>& probe,
                              const Tolerances& tol = default_tolerances());

// smallest circular gap between eigenphases of u
double min_phase_gap(const CMat& u);

// ---- factorization alpha(k) = eps^{-1} gamma(-k)^t eps gamma(k) ------------

struct Factorization {
    std::vector<CMat> gamma;  // per node
    CMat gamma_zero;
    CMat gamma_half;
    CMat N;  // gamma(0)^{-1} gamma(1/2) = e^{iN}
    double residual = 0.0;
};
// gamma with alpha = eps^{-1} gamma^t eps gamma for a single TRS matrix
CMat endpoint_factor(const CMat& alpha, const Tolerances& tol = default_tolerances());
Factorization factorize_family(const MatchingFamily& a, const Tolerances& tol = default_tolerances());

// ---- approximants -----------------------------------------------------------

// Poisson-kernel average on the periodic grid followed by the polar unitary.
MatchingFamily analytic_smooth(const MatchingFamily& a, double nu, double* sup_distance = nullptr,
                               const Tolerances& tol = default_tolerances());

enum class SplitMode { full, kramers, crossing };

struct SplitResult {
    MatchingFamily alpha;
    double sup_distance = 0.0;
    int clusters = 0;
};
// Local splitting around node `center`. full / kramers: bump of width s;
// crossing: window of `radius` nodes on each side.
SplitResult split_local(const MatchingFamily& a, int center, SplitMode mode, double s, int radius,
                        double cluster_gap, const Tolerances& tol = default_tolerances());

enum class ApproxKind { direct, gap, gen };
const char* to_string(ApproxKind k);

struct ApproxOptions {
    double nu = -1.0;          // smoothing width; < 0 means 0.25 / n2
    double s = 0.08;           // splitting scale
    double stage_budget = 0.1; // sup distance allowed per bump split
    double window_budget = 1.0; // per window replacement; these follow the family, not s
    double total_budget = 1.5; // must stay below 2
    double cluster_tol = 1e-3; // eigenvalues closer than this form one cluster
    double crossing_gap = 0.15;
    double spread_nu = 0.05;   // second smoothing after a full split
    bool allow_direct = true;  // use alpha itself when -1 is well inside its resolvent
    double direct_margin = 0.05;
};

struct ApproximantFamily {
    MatchingFamily base;
    MatchingFamily app;
    ApproxKind kind = ApproxKind::gen;
    double sup_distance = 0.0;
    std::vector<std::string> stages;  // what was applied, in order
};
ApproximantFamily build_alpha_gen(const MatchingFamily& a, const ApproxOptions& opt = {},
                                  const Tolerances& tol = default_tolerances());
ApproximantFamily build_alpha_gap(const MatchingFamily& a, const ApproxOptions& opt = {},
                                  const Tolerances& tol = default_tolerances());
// the kind's spectral pattern; empty string when satisfied
std::string approximant_pattern_violation(const ApproximantFamily& f, const Tolerances& tol = default_tolerances());

// ---- branch cut and good logarithm -----------------------------------------

struct BranchCut {
    std::vector<double> phi;  // per node, even and periodic
    double clearance = 0.0;   // min |e^{i phi} - spectrum| over the nodes
    // generic-kind parameters
    double eps0 = 0.0, eps1 = 0.0, phi0 = 0.0, phi_half = 0.0, g = 0.0, b0 = 0.0;
    bool cusp_widths_monotone = true;  // sampled check only
};
BranchCut branch_cut(const ApproximantFamily& f, const Tolerances& tol = default_tolerances());

// h = (phi - pi) 1 + cayley(e^{i(pi - phi)} alpha_app)
std::vector<CMat> good_log(const ApproximantFamily& f, const BranchCut& cut,
                           const Tolerances& tol = default_tolerances());

// ---- beta and the frame -----------------------------------------------------

struct BetaFamily {
    int n1 = 0;
    int n2 = 0;
    CMat eps;
    std::vector<CMat> alpha, h, htilde;  // per k2 node
    bool satisfies_trs = false;

    // any real k1, reduced to [-1/2, 1/2] with beta(k1 + 1) = alpha^{-1} beta(k1)
    CMat at(double k1, int j2) const;
};

struct BetaChecks {
    double continuity = 0.0;  // max node-to-node jump on [-1/2, 3/2] x [0, 1]
    double defect = 0.0;      // beta(k1)^{-1} alpha beta(k1 + 1) - 1
    double trs = 0.0;         // beta(-k) - eps^{-1} conj(beta(k)) eps
    double normalization = 0.0;
};
BetaChecks check_beta(const BetaFamily& b);

struct BetaBuild {
    BetaFamily beta;
    ApproximantFamily approximant;
    BranchCut cut;
    int index = 0;
};
BetaBuild build_beta(const MatchingFamily& a, bool want_trs, int n1, const ApproxOptions& opt = {},
                     const Tolerances& tol = default_tolerances());

FrameField assemble_frame_2d(const BaseLine& base, const BetaFamily& beta);

struct Frame2d {
    BaseLine base;
    BetaBuild beta;
    FrameField frame;
};
Frame2d construct_frame_2d(const ProjectorFamily& p, bool want_trs, const ApproxOptions& opt = {},
                           const TransportOptions& topt = {}, const Tolerances& tol = default_tolerances());

// ---- homotopy ---------------------------------------------------------------

struct Homotopy {
    std::vector<double> s;
    std::vector<MatchingFamily> path;
    BetaBuild beta;
    double endpoint_residual = 0.0;
};
Homotopy homotopy_between(const MatchingFamily& a0, const MatchingFamily& a1, int samples = 9,
                          const ApproxOptions& opt = {}, const Tolerances& tol = default_tolerances());

}  // namespace symfr
