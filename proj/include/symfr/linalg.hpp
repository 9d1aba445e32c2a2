#pragma once
// Dense complex kernel: unitary and skew-symmetric helpers, Pfaffian,
// logarithms of unitaries, winding numbers of sampled circle maps.

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "symfr/tolerances.hpp"

namespace symfr {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
constexpr cplx kI{0.0, 1.0};

// ---- small helpers ----------------------------------------------------------

double op_norm(const CMat& a);
double unitarity_defect(const CMat& u);
double hermiticity_defect(const CMat& h);
double skewness_defect(const CMat& s);

// canonical symplectic form: direct sum of [[0,1],[-1,0]]
CMat canonical_J(int m);

// principal argument mapped into [lo, lo + 2 pi)
double wrap_angle(double x, double lo);
// signed circular difference in (-pi, pi]
double angle_diff(double a, double b);

// exp(i t H) for self-adjoint H
CMat expi_hermitian(const CMat& h, double t = 1.0);

struct UnitaryEig {
    RVec phases;  // in (-pi, pi]
    CMat vectors; // unitary, columns are eigenvectors
};
// Schur form of a (numerically) normal matrix; the triangular factor is
// diagonal up to rounding, so Q carries an orthonormal eigenbasis.
UnitaryEig eig_unitary(const CMat& u);

// ---- operations -------------------------------------------------------------

cplx pfaffian(const CMat& s, const Tolerances& tol = default_tolerances());

// Winding number of a closed sampled loop in U(1).
int winding_number(const std::vector<cplx>& values, const Tolerances& tol = default_tolerances());
// Same, returning the unrounded sum / 2 pi.
double winding_real(const std::vector<cplx>& values, const Tolerances& tol = default_tolerances());

struct DegreeResult {
    int degree;
    double via_det;         // (1/2 pi) sum of det phase increments
    double via_quadrature;  // (1/2 pi i) trapezoid of tr(b* b') with spectral b'
};
DegreeResult unitary_family_degree(const std::vector<CMat>& betas,
                                   const Tolerances& tol = default_tolerances());

// s = i(1-U)(1+U)^{-1}, h = 2 arctan(s); spectrum of h in (-pi, pi).
CMat cayley_log(const CMat& u, const Tolerances& tol = default_tolerances());
// spectrum of h in (cut - 2 pi, cut)
CMat spectral_log(const CMat& u, double cut_angle, const Tolerances& tol = default_tolerances());
// midpoint of the widest arc of the unit circle free of eigenvalues, in [0, 2 pi);
// as a cut it keeps logs of near-identity unitaries centred on 0
double largest_gap_midpoint(const CMat& u);
// e^{iM/2} with sigma(M) in [0, 2 pi)
CMat unitary_sqrt(const CMat& u, const Tolerances& tol = default_tolerances());
// (M M*)^{-1/2} M
CMat polar_unitarize(const CMat& m, const Tolerances& tol = default_tolerances());

struct SymplecticBasis {
    CMat basis;  // W with W^t eps W = J
    CMat J;
};
SymplecticBasis symplectic_normal_form(const CMat& eps, const Tolerances& tol = default_tolerances());

}  // namespace symfr
