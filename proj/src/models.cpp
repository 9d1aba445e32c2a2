#include "symfr/models.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "symfr/errors.hpp"

namespace symfr {

KGrid KGrid::make(int n1, int n2) {
    if (n1 <= 0 || n2 <= 0 || n1 % 4 != 0 || n2 % 4 != 0) {
        std::ostringstream os;
        os << "grid " << n1 << "x" << n2 << " must be positive and divisible by 4";
        throw ShapeError(os.str());
    }
    return KGrid{n1, n2};
}

double TimeReversal::square_defect() const {
    if (!present()) return 0.0;
    const Eigen::Index n = theta_unitary.rows();
    return op_norm(theta_unitary * theta_unitary.conjugate() + CMat::Identity(n, n));
}

TimeReversal make_time_reversal(const CMat& theta_unitary, int m) {
    TimeReversal t;
    t.theta_unitary = theta_unitary;
    t.eps = canonical_J(m);
    return t;
}

ProjectorFamily::ProjectorFamily(std::string name, int dim, int N, int m, TimeReversal theta, KGrid grid,
                                 KFunction eval)
    : name_(std::move(name)), dim_(dim), N_(N), m_(m), theta_(std::move(theta)), grid_(grid),
      eval_(std::move(eval)), cache_(std::make_shared<Cache>()) {
    if (dim != 1 && dim != 2) throw DimensionError("dimension must be 1 or 2");
}

const CMat& ProjectorFamily::node(int j1, int j2) const {
    const int n1 = grid_.n1;
    const int n2 = dim_ == 2 ? grid_.n2 : 1;
    std::call_once(cache_->once, [&] {
        cache_->data.resize(static_cast<std::size_t>(n1) * n2);
#pragma omp parallel for collapse(2) schedule(static)
        for (int b = 0; b < n2; ++b)
            for (int a = 0; a < n1; ++a)
                cache_->data[a + static_cast<std::size_t>(n1) * b] =
                    eval_(grid_.k1(a), dim_ == 2 ? grid_.k2(b) : 0.0);
    });
    const int a = ((j1 % n1) + n1) % n1;
    const int b = dim_ == 2 ? ((j2 % n2) + n2) % n2 : 0;
    return cache_->data[a + static_cast<std::size_t>(n1) * b];
}

ProjectorFamily ProjectorFamily::with_grid(const KGrid& g) const {
    return ProjectorFamily(name_, dim_, N_, m_, theta_, g, eval_);
}

ProjectorFamily ProjectorFamily::restrict_line(double k_perp) const {
    auto f = eval_;
    return ProjectorFamily(name_ + "|line", 1, N_, m_, theta_, grid_,
                           [f, k_perp](double k, double) { return f(k, k_perp); });
}

ProjectorFamily ProjectorFamily::line_along_k2(double k1) const {
    auto f = eval_;
    return ProjectorFamily(name_ + "|k2line", 1, N_, m_, theta_, KGrid{grid_.n2, grid_.n1},
                           [f, k1](double k, double) { return f(k1, k); });
}

namespace {

struct SpectralProjector {
    KFunction H;
    double e_low, e_high;
    int dim;

    CMat operator()(double k1, double k2) const {
        const CMat h = H(k1, dim == 2 ? k2 : 0.0);
        Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (h + h.adjoint()));
        const auto& ev = es.eigenvalues();
        int r = 0;
        for (Eigen::Index i = 0; i < ev.size(); ++i) {
            if (ev(i) >= e_low && ev(i) <= e_high) {
                std::ostringstream os;
                os << "eigenvalue " << ev(i) << " inside gap window [" << e_low << ", " << e_high << "] at k=("
                   << k1 << ", " << k2 << ")";
                throw GapClosedError(os.str());
            }
            if (ev(i) < e_low) ++r;
        }
        const auto v = es.eigenvectors().leftCols(r);
        return v * v.adjoint();
    }
};

int rank_at(const CMat& p) { return static_cast<int>(std::lround(p.trace().real())); }

}  // namespace

ProjectorFamily projector_from_hamiltonian(const BlochHamiltonian& h, const KGrid& grid) {
    SpectralProjector sp{h.H, h.e_low, h.e_high, h.dim};
    const int m = rank_at(sp(0.0, 0.0));
    const int n2 = h.dim == 2 ? grid.n2 : 1;
    for (int b = 0; b < n2; ++b)
        for (int a = 0; a < grid.n1; ++a) {
            const int r = rank_at(sp(grid.k1(a), h.dim == 2 ? grid.k2(b) : 0.0));
            if (r != m) {
                std::ostringstream os;
                os << "rank changes from " << m << " to " << r << " at node (" << a << ", " << b << ")";
                throw GapClosedError(os.str());
            }
        }
    return ProjectorFamily(h.name, h.dim, h.N, m, h.theta.present() ? make_time_reversal(h.theta.theta_unitary, m)
                                                                    : TimeReversal{},
                           grid, sp);
}

namespace {

// theta(a, b) = (-conj b, conj a) on C^n (+) C^n
CMat block_theta(int n) {
    CMat u = CMat::Zero(2 * n, 2 * n);
    u.topRightCorner(n, n) = -CMat::Identity(n, n);
    u.bottomLeftCorner(n, n) = CMat::Identity(n, n);
    return u;
}

CMat qwz_h(double k1, double k2, double u) {
    const double c1 = std::cos(kTwoPi * k1), c2 = std::cos(kTwoPi * k2);
    const double s1 = std::sin(kTwoPi * k1), s2 = std::sin(kTwoPi * k2);
    const double d3 = u + c1 + c2;
    CMat h(2, 2);
    h << d3, cplx(s1, -s2), cplx(s1, s2), -d3;
    return h;
}

}  // namespace

BlochHamiltonian builtin_doubled_qwz(double u) {
    // the spectrum of each block is +-|d(k)|, smallest at a TRIM
    const double gap = std::min({std::abs(u), std::abs(u - 2.0), std::abs(u + 2.0)});
    if (gap < 1e-6) throw GapClosedError("doubled QWZ is gapless at u = " + std::to_string(u));
    BlochHamiltonian b;
    std::ostringstream os;
    os << "doubled_qwz(u=" << u << ")";
    b.name = os.str();
    b.dim = 2;
    b.N = 4;
    b.e_low = -0.5 * gap;
    b.e_high = 0.5 * gap;
    b.H = [u](double k1, double k2) {
        CMat h = CMat::Zero(4, 4);
        h.topLeftCorner(2, 2) = qwz_h(k1, k2, u);
        h.bottomRightCorner(2, 2) = qwz_h(-k1, -k2, u).conjugate();
        return h;
    };
    b.theta.theta_unitary = block_theta(2);
    b.theta.eps = canonical_J(2);
    return b;
}

ProjectorFamily builtin_qwz_block(double u, const KGrid& grid) {
    BlochHamiltonian b;
    b.name = "qwz_block";
    b.dim = 2;
    b.N = 2;
    const double gap = std::min({std::abs(u), std::abs(u - 2.0), std::abs(u + 2.0)});
    if (gap < 1e-6) throw GapClosedError("QWZ block is gapless");
    b.e_low = -0.5 * gap;
    b.e_high = 0.5 * gap;
    b.H = [u](double k1, double k2) { return qwz_h(k1, k2, u); };
    return projector_from_hamiltonian(b, grid);
}

ProjectorFamily builtin_trivial(int m, int N, const KGrid& grid, int dim) {
    if (m % 2 != 0 || N % 2 != 0 || N < m || m <= 0)
        throw DimensionError("builtin_trivial needs even 0 < m <= N with N even");
    // pairs (e_{2i}, e_{2i+1}) are theta-closed, so keeping the first m/2
    // pairs gives a theta-invariant projector
    CMat u = CMat::Zero(N, N);
    for (int b = 0; b < N; b += 2) {
        u(b, b + 1) = -1.0;
        u(b + 1, b) = 1.0;
    }
    CMat p = CMat::Zero(N, N);
    for (int i = 0; i < m; ++i) p(i, i) = 1.0;
    std::ostringstream os;
    os << "trivial(m=" << m << ",N=" << N << ")";
    return ProjectorFamily(os.str(), dim, N, m, make_time_reversal(u, m), grid,
                           [p](double, double) { return p; });
}

ProjectorFamily builtin_1d_twist(int n_wind, int n_nodes, double a0, double c) {
    // P = diag(p(k), conj p(-k)), p = |v><v|, v = (cos a, sin a e^{2 pi i n k})
    auto pk = [n_wind, a0, c](double k) {
        const double a = a0 + c * std::cos(kTwoPi * k);
        CVec v(2);
        v << std::cos(a), std::sin(a) * std::exp(kI * (kTwoPi * n_wind * k));
        return CMat(v * v.adjoint());
    };
    KFunction f = [pk](double k, double) {
        CMat p = CMat::Zero(4, 4);
        p.topLeftCorner(2, 2) = pk(k);
        p.bottomRightCorner(2, 2) = pk(-k).conjugate();
        return p;
    };
    std::ostringstream os;
    os << "twist1d(n=" << n_wind << ")";
    return ProjectorFamily(os.str(), 1, 4, 2, make_time_reversal(block_theta(2), 2), KGrid::make(n_nodes, 4), f);
}

AssumptionReport verify_assumptions(const ProjectorFamily& p) {
    AssumptionReport r;
    r.m = p.m();
    r.rank_even = p.m() % 2 == 0;
    const KGrid& g = p.grid();
    const int n2 = p.dim() == 2 ? g.n2 : 1;
    const auto& th = p.theta();
    for (int b = 0; b < n2; ++b)
        for (int a = 0; a < g.n1; ++a) {
            const double k1 = g.k1(a), k2 = p.dim() == 2 ? g.k2(b) : 0.0;
            const CMat& x = p.node(a, b);
            r.idempotency = std::max(r.idempotency, op_norm(x * x - x));
            r.self_adjointness = std::max(r.self_adjointness, hermiticity_defect(x));
            r.rank = std::max(r.rank, std::abs(x.trace().real() - p.m()));
            r.periodicity = std::max(r.periodicity, op_norm(p(k1 + 1.0, k2) - x));
            if (p.dim() == 2) r.periodicity = std::max(r.periodicity, op_norm(p(k1, k2 + 1.0) - x));
            if (th.present()) {
                const CMat& xm = p.node(g.neg1(a), p.dim() == 2 ? g.neg2(b) : 0);
                r.trs = std::max(r.trs, op_norm(th.conjugate_op(x) - xm));
            }
        }
    r.trs_square = th.square_defect();
    auto check = [&](bool ok, const char* what) {
        if (!ok) r.failures.emplace_back(what);
    };
    check(r.idempotency <= 1e-10, "idempotency");
    check(r.self_adjointness <= 1e-10, "self-adjointness");
    check(r.rank <= 1e-8, "rank constancy");
    check(r.periodicity <= 1e-10, "periodicity");
    check(th.present(), "time reversal missing");
    check(r.trs <= 1e-9, "time-reversal symmetry");
    check(r.trs_square <= 1e-10, "theta squared = -1");
    check(r.rank_even, "even rank");
    r.pass = r.failures.empty();
    return r;
}

}  // namespace symfr
