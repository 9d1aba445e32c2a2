#pragma once
// One-dimensional symmetric frames: a Kramers-paired frame at k = 0, carried
// around the circle by parallel transport and untwisted by e^{-ikM}.

#include <vector>

#include "symfr/transport.hpp"

namespace symfr {

// Grid-sampled frames. Samples cover the closed ranges j1 in [0, n1] and
// j2 in [0, n2] (n2 = 0 for d = 1), so the far edge repeats the near one
// when the frame is periodic.
struct FrameField {
    int dim = 1;
    int n1 = 0;
    int n2 = 0;
    std::vector<CMat> xi;
    bool is_periodic = false;
    bool is_trs = false;

    FrameField() = default;
    FrameField(int dim_, int n1_, int n2_);
    CMat& at(int j1, int j2 = 0) { return xi[index(j1, j2)]; }
    const CMat& at(int j1, int j2 = 0) const { return xi[index(j1, j2)]; }

private:
    std::size_t index(int j1, int j2) const { return static_cast<std::size_t>(j1) + static_cast<std::size_t>(n1 + 1) * j2; }
};

struct FrameResiduals {
    double orthonormality = 0.0;
    double range = 0.0;
    double periodicity = 0.0;
    double trs = 0.0;
};

// For d = 1 the family is evaluated along its own k; for d = 2 on the grid.
FrameResiduals frame_residuals(const FrameField& f, const ProjectorFamily& p);

struct HolonomyData {
    CMat T1;     // T(1, 0) on C^N
    CMat alpha;  // m x m matching matrix
    CMat M_op;   // T(1, 0) = e^{iM}, M commutes with theta
    CMat h;      // alpha = e^{ih}, h = Xi(0)^* M Xi(0)
    CMat gamma;  // e^{ih/2}
    double cut = kPi;  // branch cut used for M
};

// Kramers-paired orthonormal frame (v, theta v, ...) at a theta-fixed point.
CMat symmetric_frame_at_point(const CMat& p0, const TimeReversal& theta, const Tolerances& tol = default_tolerances());

// Largest distance inside the best pairing of the eigenphases of a unitary.
double kramers_defect(const CMat& u);

HolonomyData holonomy_matrix(const TransportLine& line, const CMat& xi0, const Tolerances& tol = default_tolerances());
FrameField build_frame_1d(const TransportLine& line, const CMat& xi0, const HolonomyData& hol);

// The whole construction for a d = 1 family on its grid.
struct Frame1d {
    CMat xi0;
    TransportLine line;
    HolonomyData hol;
    FrameField frame;
};
Frame1d construct_frame_1d(const ProjectorFamily& p, const TransportOptions& opt = {},
                           const Tolerances& tol = default_tolerances());

struct BerryData1d {
    std::vector<cplx> omega;  // tr(Xi^* dXi) at the nodes
    double loop = 0.0;        // closed integral of A = -i omega dk
    double half = 0.0;        // integral over [0, 1/2]
    double loop_links = 0.0;  // sum of arg det(Xi_j^* Xi_{j+1}); a gauge change moves it by 2 pi deg exactly
};
BerryData1d berry_connection_trace(const FrameField& f);

double wilson_loop_check(const HolonomyData& hol, const BerryData1d& berry);

struct Mod2GammaCheck {
    double lhs = 0.0;       // 2 (1/2 pi i) log det gamma, log det gamma = i tr(h)/2
    double rhs = 0.0;       // (1/2 pi) oint A
    double residual = 0.0;  // distance of lhs + rhs from 2Z
    bool pass = false;
};
Mod2GammaCheck mod2_gamma_identity_check(const HolonomyData& hol, const BerryData1d& berry, double tol = 1e-5);

// distance of x from the nearest even integer
double distance_to_even(double x);

}  // namespace symfr
