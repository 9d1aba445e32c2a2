#include "symfr/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "symfr/errors.hpp"

namespace symfr {

double op_norm(const CMat& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<CMat> svd(a);
    return svd.singularValues()(0);
}

double unitarity_defect(const CMat& u) {
    return op_norm(u.adjoint() * u - CMat::Identity(u.cols(), u.cols()));
}

double hermiticity_defect(const CMat& h) { return op_norm(h - h.adjoint()); }

double skewness_defect(const CMat& s) { return op_norm(s + s.transpose()); }

CMat canonical_J(int m) {
    if (m % 2 != 0) throw DimensionError("symplectic form needs even size, got " + std::to_string(m));
    CMat j = CMat::Zero(m, m);
    for (int b = 0; b < m; b += 2) {
        j(b, b + 1) = 1.0;
        j(b + 1, b) = -1.0;
    }
    return j;
}

double wrap_angle(double x, double lo) {
    double y = std::fmod(x - lo, kTwoPi);
    if (y < 0) y += kTwoPi;
    if (y >= kTwoPi) y -= kTwoPi;
    return lo + y;
}

double angle_diff(double a, double b) {
    double d = wrap_angle(a - b, -kPi);
    return d == -kPi ? kPi : d;
}

CMat expi_hermitian(const CMat& h, double t) {
    CMat hs = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<CMat> es(hs);
    CVec ph(hs.rows());
    for (Eigen::Index i = 0; i < hs.rows(); ++i) ph(i) = std::exp(kI * (t * es.eigenvalues()(i)));
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

UnitaryEig eig_unitary(const CMat& u) {
    Eigen::ComplexSchur<CMat> schur(u);
    UnitaryEig out;
    const auto& t = schur.matrixT();
    out.phases.resize(u.rows());
    for (Eigen::Index i = 0; i < u.rows(); ++i) out.phases(i) = std::arg(t(i, i));
    out.vectors = schur.matrixU();
    return out;
}

// Parlett-Reid: reduce to tridiagonal form by skew congruences with
// partial pivoting; the Pfaffian is the product of the superdiagonal
// entries at even positions, with a sign flip per row/column swap.
cplx pfaffian(const CMat& s, const Tolerances& tol) {
    const Eigen::Index n = s.rows();
    if (s.cols() != n) throw ShapeError("pfaffian of a non-square matrix");
    if (n % 2 != 0) throw DimensionError("pfaffian of odd dimension " + std::to_string(n));
    if (n == 0) return 1.0;
    const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
    if (skewness_defect(s) > tol.skew * scale) throw ShapeError("pfaffian input is not skew-symmetric");

    CMat a = s;
    cplx pf = 1.0;
    for (Eigen::Index k = 0; k + 1 < n; k += 2) {
        Eigen::Index kp;
        a.col(k).tail(n - k - 1).cwiseAbs().maxCoeff(&kp);
        kp += k + 1;
        if (kp != k + 1) {
            a.row(k + 1).swap(a.row(kp));
            a.col(k + 1).swap(a.col(kp));
            pf = -pf;
        }
        if (a(k + 1, k) == cplx(0.0)) return 0.0;
        pf *= a(k, k + 1);
        if (k + 2 < n) {
            const Eigen::Index r = n - k - 2;
            CVec tau = a.row(k).tail(r).transpose() / a(k, k + 1);
            CVec col = a.col(k + 1).tail(r);
            a.bottomRightCorner(r, r) += tau * col.transpose() - col * tau.transpose();
        }
    }
    return pf;
}

double winding_real(const std::vector<cplx>& values, const Tolerances& tol) {
    const std::size_t n = values.size();
    if (n == 0) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const cplx a = values[i];
        const cplx b = values[(i + 1) % n];
        if (std::abs(std::abs(a) - 1.0) > tol.unit_modulus) {
            std::ostringstream os;
            os << "sample " << i << " has modulus " << std::abs(a);
            throw ShapeError(os.str());
        }
        const double step = std::arg(b * std::conj(a));
        if (std::abs(step) >= kPi / 2) {
            std::ostringstream os;
            os << "phase jump " << step << " between samples " << i << " and " << (i + 1) % n;
            throw UnderResolvedError(os.str());
        }
        total += step;
    }
    return total / kTwoPi;
}

int winding_number(const std::vector<cplx>& values, const Tolerances& tol) {
    const double w = winding_real(values, tol);
    const double r = std::round(w);
    if (std::abs(w - r) >= tol.degree) {
        std::ostringstream os;
        os << "winding " << w << " is not an integer";
        throw NonIntegerDegreeError(os.str());
    }
    return static_cast<int>(r);
}

DegreeResult unitary_family_degree(const std::vector<CMat>& betas, const Tolerances& tol) {
    const int n = static_cast<int>(betas.size());
    if (n == 0) return {0, 0.0, 0.0};
    std::vector<cplx> dets(n);
    for (int j = 0; j < n; ++j) {
        const cplx d = betas[j].determinant();
        dets[j] = d / std::abs(d);
    }
    DegreeResult out{};
    out.via_det = winding_real(dets, tol);

    // spectral derivative of the periodic samples, Nyquist mode dropped
    const Eigen::Index m = betas[0].rows();
    const int qmax = (n - 1) / 2;
    std::vector<CMat> coef(2 * qmax + 1, CMat::Zero(m, betas[0].cols()));
    for (int q = -qmax; q <= qmax; ++q)
        for (int j = 0; j < n; ++j)
            coef[q + qmax] += betas[j] * std::exp(-kI * (kTwoPi * q * j / n));
    cplx acc = 0.0;
    for (int j = 0; j < n; ++j) {
        CMat d = CMat::Zero(m, betas[0].cols());
        for (int q = -qmax; q <= qmax; ++q)
            d += (kI * (kTwoPi * q)) * coef[q + qmax] * std::exp(kI * (kTwoPi * q * j / n));
        d /= static_cast<double>(n);
        acc += (betas[j].adjoint() * d).trace();
    }
    out.via_quadrature = (acc / static_cast<double>(n) / (kI * kTwoPi)).real();

    const double r = std::round(out.via_det);
    if (std::abs(out.via_det - r) >= tol.degree)
        throw NonIntegerDegreeError("determinant winding " + std::to_string(out.via_det));
    out.degree = static_cast<int>(r);
    return out;
}

namespace {

void require_square(const CMat& u, const char* who) {
    if (u.rows() != u.cols()) throw ShapeError(std::string(who) + ": matrix is not square");
}

void require_unitary(const CMat& u, const Tolerances& tol, const char* who) {
    require_square(u, who);
    const double d = unitarity_defect(u);
    if (d > tol.unitary) {
        std::ostringstream os;
        os << who << ": unitarity defect " << d;
        throw ShapeError(os.str());
    }
}

CMat hermitize(const CMat& h) { return 0.5 * (h + h.adjoint()); }

}  // namespace

CMat cayley_log(const CMat& u, const Tolerances& tol) {
    require_unitary(u, tol, "cayley_log");
    const auto eig = eig_unitary(u);
    for (Eigen::Index i = 0; i < eig.phases.size(); ++i) {
        if (std::abs(std::exp(kI * eig.phases(i)) + 1.0) <= tol.resolvent)
            throw BranchPointError("cayley_log: -1 lies in the spectrum");
    }
    const Eigen::Index n = u.rows();
    const CMat one = CMat::Identity(n, n);
    CMat s = kI * (one - u) * (one + u).partialPivLu().inverse();
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(s));
    RVec h(n);
    for (Eigen::Index i = 0; i < n; ++i) h(i) = 2.0 * std::atan(es.eigenvalues()(i));
    return hermitize(es.eigenvectors() * h.asDiagonal() * es.eigenvectors().adjoint());
}

CMat spectral_log(const CMat& u, double cut_angle, const Tolerances& tol) {
    require_unitary(u, tol, "spectral_log");
    const auto eig = eig_unitary(u);
    const Eigen::Index n = u.rows();
    RVec ph(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(std::exp(kI * eig.phases(i)) - std::exp(kI * cut_angle)) <= tol.resolvent)
            throw BranchPointError("spectral_log: cut at " + std::to_string(cut_angle) + " meets the spectrum");
        ph(i) = wrap_angle(eig.phases(i), cut_angle - kTwoPi);
    }
    return hermitize(eig.vectors * ph.asDiagonal() * eig.vectors.adjoint());
}

double largest_gap_midpoint(const CMat& u) {
    const auto eig = eig_unitary(u);
    std::vector<double> ph(eig.phases.data(), eig.phases.data() + eig.phases.size());
    std::sort(ph.begin(), ph.end());
    double best = -1.0, mid = kPi;
    for (std::size_t i = 0; i < ph.size(); ++i) {
        const double a = ph[i];
        const double b = i + 1 < ph.size() ? ph[i + 1] : ph[0] + kTwoPi;
        if (b - a > best) {
            best = b - a;
            mid = 0.5 * (a + b);
        }
    }
    return wrap_angle(mid, 0.0);
}

CMat unitary_sqrt(const CMat& u, const Tolerances& tol) {
    require_unitary(u, tol, "unitary_sqrt");
    const auto eig = eig_unitary(u);
    const Eigen::Index n = u.rows();
    CVec r(n);
    for (Eigen::Index i = 0; i < n; ++i) r(i) = std::exp(kI * (0.5 * wrap_angle(eig.phases(i), 0.0)));
    return eig.vectors * r.asDiagonal() * eig.vectors.adjoint();
}

CMat polar_unitarize(const CMat& m, const Tolerances&) {
    require_square(m, "polar_unitarize");
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(m * m.adjoint()));
    const Eigen::Index n = m.rows();
    RVec inv_sqrt(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double s2 = es.eigenvalues()(i);
        if (!(s2 > 1e-16)) throw SingularError("polar_unitarize: singular value below 1e-8");
        inv_sqrt(i) = 1.0 / std::sqrt(s2);
    }
    return es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().adjoint() * m;
}

SymplecticBasis symplectic_normal_form(const CMat& eps, const Tolerances& tol) {
    require_square(eps, "symplectic_normal_form");
    const Eigen::Index m = eps.rows();
    if (m % 2 != 0) throw ShapeError("symplectic_normal_form: odd dimension");
    if (unitarity_defect(eps) > tol.unitary || skewness_defect(eps) > tol.skew)
        throw ShapeError("symplectic_normal_form: input is not unitary and skew");

    // The map x -> conj(eps^t x) pairs each unit vector with a partner that
    // completes a canonical 2x2 block; Gram-Schmidt over the basis vectors.
    CMat w = CMat::Zero(m, m);
    Eigen::Index filled = 0;
    std::vector<bool> used(m, false);
    while (filled < m) {
        Eigen::Index best = -1;
        double best_norm = -1.0;
        CVec best_x;
        for (Eigen::Index j = 0; j < m; ++j) {
            if (used[j]) continue;
            CVec x = CVec::Unit(m, j);
            for (int pass = 0; pass < 2; ++pass)
                x -= w.leftCols(filled) * (w.leftCols(filled).adjoint() * x);
            if (x.norm() > best_norm + 1e-12) {
                best_norm = x.norm();
                best = j;
                best_x = x;
            }
        }
        used[best] = true;
        CVec x = best_x / best_x.norm();
        CVec y = (eps.transpose() * x).conjugate();
        y -= w.leftCols(filled) * (w.leftCols(filled).adjoint() * y);
        y -= x * x.dot(y);
        y /= y.norm();
        w.col(filled) = x;
        w.col(filled + 1) = y;
        filled += 2;
    }
    return {w, canonical_J(static_cast<int>(m))};
}

}  // namespace symfr
