#include "symfr/frames1d.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "symfr/errors.hpp"

namespace symfr {

FrameField::FrameField(int dim_, int n1_, int n2_) : dim(dim_), n1(n1_), n2(n2_) {
    xi.resize(static_cast<std::size_t>(n1 + 1) * (n2 + 1));
}

FrameResiduals frame_residuals(const FrameField& f, const ProjectorFamily& p) {
    FrameResiduals r;
    const int m = p.m();
    const CMat id = CMat::Identity(m, m);
    const auto& th = p.theta();
    const int top2 = f.dim == 2 ? f.n2 : 0;
    for (int b = 0; b <= top2; ++b)
        for (int a = 0; a <= f.n1; ++a) {
            const CMat& x = f.at(a, b);
            const double k1 = static_cast<double>(a) / f.n1;
            const double k2 = f.dim == 2 ? static_cast<double>(b) / f.n2 : 0.0;
            r.orthonormality = std::max(r.orthonormality, op_norm(x.adjoint() * x - id));
            r.range = std::max(r.range, (p(k1, k2) * x - x).norm());
        }
    for (int b = 0; b <= top2; ++b) r.periodicity = std::max(r.periodicity, (f.at(f.n1, b) - f.at(0, b)).norm());
    if (f.dim == 2)
        for (int a = 0; a <= f.n1; ++a) r.periodicity = std::max(r.periodicity, (f.at(a, f.n2) - f.at(a, 0)).norm());
    if (th.present()) {
        const int n2 = f.dim == 2 ? f.n2 : 1;
        for (int b = 0; b < n2; ++b)
            for (int a = 0; a < f.n1; ++a) {
                const int na = (f.n1 - a) % f.n1;
                const int nb = f.dim == 2 ? (f.n2 - b) % f.n2 : 0;
                const CMat rhs = th.apply(f.at(a, b)) * th.eps;
                r.trs = std::max(r.trs, (f.at(na, nb) - rhs).norm());
            }
    }
    return r;
}

CMat symmetric_frame_at_point(const CMat& p0, const TimeReversal& theta, const Tolerances&) {
    const double inv = op_norm(theta.conjugate_op(p0) - p0);
    if (inv > 1e-9) {
        std::ostringstream os;
        os << "projector is not theta-invariant (defect " << inv << ")";
        throw NotTRInvariantError(os.str());
    }
    const Eigen::Index n = p0.rows();
    const int m = static_cast<int>(std::lround(p0.trace().real()));
    if (m % 2 != 0) throw DimensionError("odd rank at a theta-fixed point");
    CMat xi(n, m);
    int filled = 0;
    for (Eigen::Index j = 0; j < n && filled < m; ++j) {
        CVec v = p0 * CVec::Unit(n, j);
        for (int pass = 0; pass < 2; ++pass) v -= xi.leftCols(filled) * (xi.leftCols(filled).adjoint() * v);
        if (v.norm() < 1e-3) continue;  // tie-break: move on to the next basis vector
        v /= v.norm();
        CVec w = theta.apply(v);
        // antiunitarity makes w orthogonal to v and to the earlier pairs;
        // re-orthogonalize against rounding only
        w -= xi.leftCols(filled) * (xi.leftCols(filled).adjoint() * w);
        w -= v * v.dot(w);
        w /= w.norm();
        xi.col(filled) = v;
        xi.col(filled + 1) = w;
        filled += 2;
    }
    if (filled < m) throw NotTRInvariantError("could not complete a Kramers-paired frame");
    return xi;
}

double kramers_defect(const CMat& u) {
    const auto eig = eig_unitary(u);
    std::vector<double> ph(eig.phases.data(), eig.phases.data() + eig.phases.size());
    std::sort(ph.begin(), ph.end());
    const std::size_t n = ph.size();
    if (n % 2 != 0) return kPi;
    double best = 1e300;
    for (std::size_t off = 0; off < 2; ++off) {
        double worst = 0.0;
        for (std::size_t i = 0; i < n; i += 2)
            worst = std::max(worst, std::abs(angle_diff(ph[(i + off) % n], ph[(i + off + 1) % n])));
        best = std::min(best, worst);
    }
    return best;
}

namespace {

// Branch cut for log T(1,0): pi unless an eigenvalue sits near -1, then the
// midpoint of the spectral gap nearest to pi.
double choose_cut(const CMat& t1, const Tolerances& tol) {
    const auto eig = eig_unitary(t1);
    std::vector<double> ph(eig.phases.data(), eig.phases.data() + eig.phases.size());
    bool near = false;
    for (double x : ph) near = near || std::abs(std::exp(kI * x) + 1.0) <= tol.resolvent;
    if (!near) return kPi;
    std::sort(ph.begin(), ph.end());
    double best_mid = kPi, best_dist = 1e300;
    for (std::size_t i = 0; i < ph.size(); ++i) {
        const double a = ph[i];
        const double b = i + 1 < ph.size() ? ph[i + 1] : ph[0] + kTwoPi;
        if (b - a <= 2.0 * tol.resolvent) continue;
        const double mid = 0.5 * (a + b);
        const double d = std::abs(angle_diff(mid, kPi));
        if (d < best_dist) {
            best_dist = d;
            best_mid = mid;
        }
    }
    return wrap_angle(best_mid, -kPi);
}

}  // namespace

HolonomyData holonomy_matrix(const TransportLine& line, const CMat& xi0, const Tolerances& tol) {
    if (line.j_min > 0 || line.j_max < line.n_nodes) throw ShapeError("holonomy needs the line over [0, 1]");
    HolonomyData hol;
    hol.T1 = line.at(line.n_nodes);
    hol.alpha = xi0.adjoint() * hol.T1 * xi0;
    hol.cut = choose_cut(hol.T1, tol);
    hol.M_op = spectral_log(hol.T1, hol.cut, tol);
    CMat h = xi0.adjoint() * hol.M_op * xi0;
    hol.h = 0.5 * (h + h.adjoint());
    hol.gamma = expi_hermitian(hol.h, 0.5);
    return hol;
}

FrameField build_frame_1d(const TransportLine& line, const CMat& xi0, const HolonomyData& hol) {
    const int n = line.n_nodes;
    FrameField f(1, n, 0);
    for (int j = 0; j <= n; ++j) {
        const double k = static_cast<double>(j) / n;
        f.at(j) = line.at(j) * expi_hermitian(hol.M_op, -k) * xi0;
    }
    f.is_periodic = true;
    f.is_trs = true;
    return f;
}

Frame1d construct_frame_1d(const ProjectorFamily& p, const TransportOptions& opt, const Tolerances& tol) {
    if (p.dim() != 1) throw DimensionError("construct_frame_1d needs a 1-d family");
    Frame1d out;
    const int n = p.grid().n1;
    out.xi0 = symmetric_frame_at_point(p(0.0), p.theta(), tol);
    out.line = transport_line(p, 0.0, n, 0, n, opt);
    out.hol = holonomy_matrix(out.line, out.xi0, tol);
    out.frame = build_frame_1d(out.line, out.xi0, out.hol);
    return out;
}

BerryData1d berry_connection_trace(const FrameField& f) {
    if (f.dim != 1) throw DimensionError("berry_connection_trace takes a 1-d frame");
    const int n = f.n1;
    const double dk = 1.0 / n;
    BerryData1d b;
    b.omega.resize(n);
    for (int j = 0; j < n; ++j) {
        const CMat& next = f.at(j + 1);  // the closing sample, Xi(1) = Xi(0)
        const CMat& prev = f.at((j - 1 + n) % n);
        b.omega[j] = (f.at(j).adjoint() * (next - prev)).trace() / (2.0 * dk);
    }
    // A = -i omega dk; omega is imaginary so A is real
    double loop = 0.0;
    for (int j = 0; j < n; ++j) loop += (-kI * b.omega[j]).real() * dk;
    double half = 0.0;
    for (int j = 0; j <= n / 2; ++j) {
        const double w = (j == 0 || j == n / 2) ? 0.5 : 1.0;
        half += w * (-kI * b.omega[j]).real() * dk;
    }
    for (int j = 0; j < n; ++j) b.loop_links += std::arg((f.at(j).adjoint() * f.at(j + 1)).determinant());
    b.loop = loop;
    b.half = half;
    return b;
}

double wilson_loop_check(const HolonomyData& hol, const BerryData1d& berry) {
    return std::abs(hol.alpha.determinant() - std::exp(-kI * berry.loop));
}

double distance_to_even(double x) {
    const double r = x - 2.0 * std::round(x / 2.0);
    return std::abs(r);
}

Mod2GammaCheck mod2_gamma_identity_check(const HolonomyData& hol, const BerryData1d& berry, double tol) {
    // det gamma = e^{-(i/2) oint A}, so twice its normalized log is
    // -(1/2 pi) oint A modulo 2
    Mod2GammaCheck c;
    c.lhs = hol.h.trace().real() / kTwoPi;
    c.rhs = berry.loop / kTwoPi;
    c.residual = distance_to_even(c.lhs + c.rhs);
    c.pass = c.residual < tol;
    return c;
}

}  // namespace symfr
