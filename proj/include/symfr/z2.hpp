#pragma once
// Z2 invariants of time-reversal symmetric projector families on the torus,
// computed several independent ways so that they can be checked against each
// other.

#include <array>
#include <string>
#include <vector>

#include "symfr/frames2d.hpp"

namespace symfr {

// Graf-Porta style index from the matching family: three formulas sharing
// only alpha. All values are pre-rounding.
struct GrafPortaIndex {
    int bit = 0;
    double via_pairs = 0.0;   // det phase change plus endpoint Kramers phases
    double via_gamma = 0.0;   // det phase change plus Arg(det gamma(0) / det gamma(1/2))
    double via_degree = 0.0;  // unrounded winding of det gamma over the circle
    double residual = 0.0;    // worst distance from an integer
    Factorization factors;
};
GrafPortaIndex graf_porta_index(const MatchingFamily& a, const Tolerances& tol = default_tolerances());

// parity of the crossing count of a branch cut; fails if the cut is not
// admissible for the generic approximant
int crossing_count_index(const MatchingFamily& a, const ApproxOptions& opt = {},
                         const Tolerances& tol = default_tolerances());

// F = -i tr(P [d1 P, d2 P]) by central differences of the projector function,
// on the n1 x n2 grid of the family.
struct CurvatureGrid {
    int n1 = 0, n2 = 0;
    std::vector<double> F;  // row major in j2
    double max_imag = 0.0;  // largest imaginary part thrown away
    double at(int j1, int j2) const { return F[static_cast<std::size_t>(j2) * n1 + j1]; }
};
CurvatureGrid berry_curvature(const ProjectorFamily& p, double h = 1e-4);
// (1/2 pi) x trapezoid over the whole torus
double chern_from_curvature(const CurvatureGrid& c);
// (1/2 pi) x trapezoid over [0,1] x [0,1/2]
double half_torus_flux(const CurvatureGrid& c);

// link-variable Chern number of the family on its grid (gauge independent)
double chern_link_variable(const ProjectorFamily& p);

// Curvature over half the torus together with the Berry loops of symmetric
// frames on the k2 = 0 and k2 = 1/2 lines. The printed variant has the
// opposite relative sign of the loop term and is kept as a diagnostic.
struct GeometricIndex {
    int bit = 0;
    double value = 0.0;
    double printed_variant = 0.0;
    double flux_half = 0.0;  // (1/2 pi) integral of F over the half torus
    double loop_zero = 0.0;  // oint A on k2 = 0
    double loop_half = 0.0;  // on k2 = 1/2
    int grid = 0;            // grid size that met the tolerance
};
GeometricIndex fu_kane_geometric(const ProjectorFamily& p, const TransportOptions& opt = {},
                                 const Tolerances& tol = default_tolerances(), int max_grid = 512);
// the same formula for given loop frames (no refinement)
GeometricIndex fu_kane_geometric(const ProjectorFamily& p, const FrameField& loop_zero, const FrameField& loop_half,
                                 const Tolerances& tol = default_tolerances());

// Winding parity of det U on the edge k1 = 1/2 of an obstruction unitary
// U with U(1/2, k2) = alpha(k2)^{-1} at the Kramers points.
struct FmpIndex {
    int bit = 0;
    double degree = 0.0;        // unrounded winding of det U(1/2, .)
    double gamma_degree = 0.0;  // winding of det gamma for comparison
    double trs_residual = 0.0;  // U(1/2,-k) against its symmetric partner
};
FmpIndex fmp_delta(const MatchingFamily& a, const Tolerances& tol = default_tolerances());

// Half holonomies g(k*) = Xi(0,k*)^* T_{k*}(0,-1/2) Xi(-1/2,k*) between
// symmetric frames; det g against the square root of det alpha continued
// from k2 = 0. Index 1 when the two sign ratios differ.
struct ProdanIndex {
    int bit = 0;
    cplx ratio_zero, ratio_half;
    double product = 0.0;
    double residual_left = 0.0;   // ||g eps g^t eps^{-1} - alpha(k*)||
    double residual_right = 0.0;  // ||eps^{-1} g^t eps g - alpha(k*)||
};
ProdanIndex prodan_index(const ProjectorFamily& p, const BaseLine& base, const TransportOptions& opt = {},
                         const Tolerances& tol = default_tolerances());

// the same ratio read off alpha(0), alpha(1/2) of the matching family
struct TrimIndex {
    int bit = 0;
    cplx ratio_zero, ratio_half;
};
TrimIndex trim_endpoint_index(const MatchingFamily& a, const Tolerances& tol = default_tolerances());

// Sewing matrix w(k) = Phi(-k)^* theta Phi(k) of a frame on the grid.
struct SewingMatrix {
    int n1 = 0, n2 = 0;
    std::vector<CMat> w;
    const CMat& at(int j1, int j2) const { return w[static_cast<std::size_t>(j2) * n1 + j1]; }
};
SewingMatrix sewing_matrix(const FrameField& f, const TimeReversal& theta);

// Pf(w(K)) / sqrt(det w(K)) at the four Kramers points, the square root
// continued along a path through them.
struct PfaffianIndex {
    int bit = 0;
    std::array<cplx, 4> pf{};
    std::array<cplx, 4> sqrt_det{};
    double product = 0.0;
    double skewness = 0.0;        // worst ||w + w^t|| at the Kramers points
    double loop_closure = 0.0;    // |sqrt det w after the loop back to 0 - start|
};
PfaffianIndex fu_kane_pfaffian(const FrameField& f, const TimeReversal& theta,
                               const Tolerances& tol = default_tolerances());

// Everything, with the equality checks between the definitions.
struct Z2Options {
    bool geometric = true;
    bool fmp = true;
    bool prodan = true;
    bool pfaffian = true;   // needs a 2-d frame without TRS
    bool crossing = true;   // needs the generic approximant
    int max_grid = 512;
    ApproxOptions approx{};
    TransportOptions transport{};
};

struct Z2Report {
    std::string model;
    int n1 = 0, n2 = 0;
    int index = 0;
    GrafPortaIndex graf_porta;
    bool has_geometric = false, has_fmp = false, has_prodan = false, has_pfaffian = false, has_crossing = false;
    GeometricIndex geometric;
    FmpIndex fmp;
    ProdanIndex prodan;
    TrimIndex trim;
    PfaffianIndex pfaffian;
    int crossing_bit = 0;
    double chern = 0.0;
    std::vector<std::string> notes;  // methods that could not run and why
};
// Throws EqualityViolationError when two computed definitions disagree.
Z2Report full_report(const ProjectorFamily& p, const Z2Options& opt = {}, const Tolerances& tol = default_tolerances());

}  // namespace symfr
