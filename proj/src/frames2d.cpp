#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "symfr/errors.hpp"
#include "symfr/frames2d.hpp"
#include "symfr/z2.hpp"

namespace symfr {

namespace {

CMat hermitize(const CMat& h) { return 0.5 * (h + h.adjoint()); }

std::vector<double> sorted_from(const CMat& u, double lo) {
    const auto e = eig_unitary(u);
    std::vector<double> ph;
    for (Eigen::Index i = 0; i < e.phases.size(); ++i) ph.push_back(wrap_angle(e.phases(i), lo));
    std::sort(ph.begin(), ph.end());
    return ph;
}

double cut_clearance(const MatchingFamily& a, const std::vector<double>& phi) {
    double c = 1e300;
    for (int j = 0; j < a.n2; ++j) {
        const auto e = eig_unitary(a.at(j));
        const cplx z = std::exp(kI * phi[static_cast<std::size_t>(j)]);
        for (Eigen::Index i = 0; i < e.phases.size(); ++i) c = std::min(c, std::abs(std::exp(kI * e.phases(i)) - z));
    }
    return c;
}

}  // namespace

// ---- matching family --------------------------------------------------------

MatchingFamily constant_family(const CMat& value, const CMat& eps, int n2) {
    MatchingFamily a;
    a.n2 = n2;
    a.eps = eps;
    a.alpha.assign(static_cast<std::size_t>(n2), value);
    a.eval = [value](double) { return value; };
    return a;
}

MatchingChecks check_matching(const MatchingFamily& a) {
    MatchingChecks c;
    for (int j = 0; j < a.n2; ++j) {
        const CMat& u = a.at(j);
        c.jump = std::max(c.jump, op_norm(a.at(j + 1) - u));
        c.trs = std::max(c.trs, op_norm(a.eps * u - a.at(a.neg(j)).transpose() * a.eps));
        c.unitarity = std::max(c.unitarity, unitarity_defect(u));
        c.det_even = std::max(c.det_even, std::abs(u.determinant() - a.at(a.neg(j)).determinant()));
    }
    c.kramers_zero = kramers_defect(a.at(0));
    c.kramers_half = kramers_defect(a.at(a.n2 / 2));
    return c;
}

BaseLine matching_family(const ProjectorFamily& p, const TransportOptions& opt, Exec exec, const Tolerances& tol) {
    if (p.dim() != 2) throw DimensionError("matching family needs a 2-d family");
    if (!p.theta().present()) throw NotTRInvariantError("matching family needs time reversal");
    const int n1 = p.grid().n1, n2 = p.grid().n2;
    if (n2 % 4 != 0) throw ShapeError("k2 grid must be divisible by 4");
    BaseLine out;
    out.n1 = n1;
    const ProjectorFamily line = p.line_along_k2(0.0);
    out.base = construct_frame_1d(line, opt, tol);
    std::vector<double> kp(static_cast<std::size_t>(n2));
    for (int j = 0; j < n2; ++j) kp[static_cast<std::size_t>(j)] = static_cast<double>(j) / n2;
    out.lines = transport_lines(p, kp, n1, 0, n1, opt, exec);

    MatchingFamily& a = out.alpha;
    a.n2 = n2;
    a.eps = p.theta().eps;
    a.alpha.resize(static_cast<std::size_t>(n2));
    for (int j = 0; j < n2; ++j) {
        const CMat& xi = out.base.frame.at(j);
        a.alpha[static_cast<std::size_t>(j)] = polar_unitarize(xi.adjoint() * out.lines[j].at(n1) * xi, tol);
    }
    // off-grid values: Xi(0,k) = T_line(k,0) e^{-ikM} Xi0 and T_k(1,0)
    const CMat xi0 = out.base.xi0;
    const CMat M = out.base.hol.M_op;
    a.eval = [p, line, xi0, M, opt, tol](double k) {
        const double kk = k - std::floor(k);
        const CMat xi = parallel_transport(line, 0.0, 0.0, kk, opt) * expi_hermitian(M, -kk) * xi0;
        return CMat(polar_unitarize(xi.adjoint() * parallel_transport(p, kk, 0.0, 1.0, opt) * xi, tol));
    };
    return out;
}

// ---- factorization ----------------------------------------------------------

CMat endpoint_factor(const CMat& alpha, const Tolerances& tol) {
    // any spectral function of a TRS alpha is TRS; the cut sits in the widest gap
    return expi_hermitian(spectral_log(alpha, largest_gap_midpoint(alpha), tol), 0.5);
}

Factorization factorize_family(const MatchingFamily& a, const Tolerances& tol) {
    const int n2 = a.n2, half = n2 / 2;
    if (n2 % 2 != 0) throw ShapeError("factorization needs an even k2 grid");
    Factorization f;
    f.gamma_zero = endpoint_factor(a.at(0), tol);
    f.gamma_half = endpoint_factor(a.at(half), tol);
    const CMat x = polar_unitarize(f.gamma_zero.adjoint() * f.gamma_half, tol);
    f.N = spectral_log(x, largest_gap_midpoint(x), tol);
    f.gamma.resize(static_cast<std::size_t>(n2));
    for (int j = 0; j <= half; ++j) f.gamma[static_cast<std::size_t>(j)] = f.gamma_zero * expi_hermitian(f.N, 2.0 * a.k2(j));
    const CMat& eps = a.eps;
    for (int j = half + 1; j < n2; ++j) {
        const CMat& g = f.gamma[static_cast<std::size_t>(n2 - j)];
        f.gamma[static_cast<std::size_t>(j)] = (eps * a.at(n2 - j) * g.adjoint() * eps.adjoint()).transpose();
    }
    for (int j = 0; j < n2; ++j) {
        const CMat& g = f.gamma[static_cast<std::size_t>(j)];
        const CMat& gm = f.gamma[static_cast<std::size_t>(a.neg(j))];
        f.residual = std::max(f.residual, op_norm(eps.adjoint() * gm.transpose() * eps * g - a.at(j)));
    }
    return f;
}

// ---- branch cut ---------------------------------------------------------------

namespace {

BranchCut gap_cut(const ApproximantFamily& f, const Tolerances& tol) {
    const MatchingFamily& a = f.app;
    const int half = a.n2 / 2;
    const auto curves = track_eigenphases(a, tol);
    BranchCut cut;
    cut.phi.resize(static_cast<std::size_t>(a.n2));
    // the cut follows the middle of the neighbouring pair of curves whose
    // gap stays widest; curves keep their order since nothing is degenerate
    const int m = a.m();
    int best = 0;
    double widest = -1.0;
    for (int i = 0; i < m; ++i) {
        double g = 1e300;
        for (const RVec& ph : curves.phase) g = std::min(g, i + 1 < m ? ph(i + 1) - ph(i) : ph(0) + kTwoPi - ph(m - 1));
        if (g > widest) {
            widest = g;
            best = i;
        }
    }
    for (int j = 0; j <= half; ++j) {
        const RVec& ph = curves.phase[static_cast<std::size_t>(j)];
        const double upper = best + 1 < m ? ph(best + 1) : ph(0) + kTwoPi;
        cut.phi[static_cast<std::size_t>(j)] = 0.5 * (ph(best) + upper);
    }
    for (int j = half + 1; j < a.n2; ++j) cut.phi[static_cast<std::size_t>(j)] = cut.phi[static_cast<std::size_t>(a.n2 - j)];
    return cut;
}

struct GenAttempt {
    BranchCut cut;
    int count = 0;
    bool tangent = false;
};

GenAttempt gen_cut_attempt(const MatchingFamily& a, const EigenCurves& cv, const std::vector<int>& order,
                           double lo, int suffix_start, const Tolerances& tol) {
    const int half = a.n2 / 2;
    const int m = a.m();
    const int top = order.back();
    auto phase = [&](int j, int label) { return cv.phase[static_cast<std::size_t>(j)](label); };
    GenAttempt out;
    BranchCut& c = out.cut;

    // prefix: all labels still inside (lo, lo + 2 pi)
    int prefix = 0;
    for (int j = 0; j <= half; ++j) {
        bool inside = true;
        for (int i = 0; i < m; ++i) inside = inside && phase(j, i) > lo && phase(j, i) < lo + kTwoPi;
        if (!inside) break;
        prefix = j;
    }
    prefix = std::min(prefix, suffix_start - 1);
    c.eps0 = a.k2(prefix);
    c.phi0 = 1e300;
    for (int j = 0; j <= prefix; ++j) c.phi0 = std::min(c.phi0, lo + kTwoPi - phase(j, top));

    // suffix: cusp structure at 1/2
    c.eps1 = 0.5 - a.k2(suffix_start);
    {
        const auto psi = sorted_from(a.at(half), largest_gap_midpoint(a.at(half)));
        // pairing offset with the tighter pairs
        double best = 1e300;
        int off = 0;
        for (int o = 0; o < 2; ++o) {
            double worst = 0.0;
            for (int p = 0; p < m / 2; ++p) {
                const int i = o + 2 * p;
                const double lo_v = psi[static_cast<std::size_t>(i % m)];
                const double hi_v = psi[static_cast<std::size_t>((i + 1) % m)] + (i + 1 >= m ? kTwoPi : 0.0);
                worst = std::max(worst, hi_v - lo_v);
            }
            if (worst < best) {
                best = worst;
                off = o;
            }
        }
        c.phi_half = 1e300;
        for (int p = 0; p < m / 2; ++p) {
            const int hi = off + 2 * p + 1;  // upper member of pair p; the next pair starts at hi + 1
            const double up = psi[static_cast<std::size_t>(hi % m)] + (hi >= m ? kTwoPi : 0.0);
            const int nx = hi + 1;
            const double next = psi[static_cast<std::size_t>(nx % m)] + (nx >= m ? kTwoPi : 0.0);
            c.phi_half = std::min(c.phi_half, next - up);
        }
        // sampled monotonicity of the widths between the tracked partners
        c.cusp_widths_monotone = true;
        const RVec& end = cv.phase[static_cast<std::size_t>(half)];
        for (int i = 0; i < m; ++i) {
            // partner: the label closest to i at 1/2 modulo 2 pi
            int partner = -1;
            double d = 1e300;
            for (int t = 0; t < m; ++t) {
                if (t == i) continue;
                const double x = std::abs(angle_diff(end(t), end(i)));
                if (x < d) {
                    d = x;
                    partner = t;
                }
            }
            for (int j = suffix_start; j < half; ++j) {
                const double w0 = std::abs(angle_diff(phase(j, partner), phase(j, i)));
                const double w1 = std::abs(angle_diff(phase(j + 1, partner), phase(j + 1, i)));
                if (w1 > w0 + 1e-12) c.cusp_widths_monotone = false;
            }
        }
    }

    // middle gap
    c.g = 1e300;
    for (int j = prefix + 1; j < suffix_start; ++j) c.g = std::min(c.g, min_phase_gap(a.at(j)));
    c.b0 = std::min({c.phi0, c.phi_half / 3.0, c.g / 3.0});

    std::vector<double> probe(static_cast<std::size_t>(half + 1));
    for (int j = 0; j <= half; ++j) probe[static_cast<std::size_t>(j)] = phase(j, top) + c.b0;
    try {
        const auto cc = count_crossings(cv, probe, tol);
        out.count = cc.count;
    } catch (const TangencyError&) {
        out.tangent = true;
        return out;
    }
    c.phi.resize(static_cast<std::size_t>(a.n2));
    for (int j = 0; j <= half; ++j) c.phi[static_cast<std::size_t>(j)] = probe[static_cast<std::size_t>(j)];
    for (int j = half + 1; j < a.n2; ++j) c.phi[static_cast<std::size_t>(j)] = probe[static_cast<std::size_t>(a.n2 - j)];
    return out;
}

BranchCut gen_cut(const ApproximantFamily& f, const Tolerances& tol) {
    const MatchingFamily& a = f.app;
    const int half = a.n2 / 2;
    const int m = a.m();
    const double lo = largest_gap_midpoint(a.at(0));
    const auto cv = track_eigenphases(a, lo, tol);
    // labels ordered by their phase at the first node after 0, where pairs have split
    std::vector<int> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) { return cv.phase[1](x) < cv.phase[1](y); });

    int suffix = std::max(1, half - std::max(1, half / 4));
    for (int attempt = 0; attempt < 7; ++attempt) {
        auto at = gen_cut_attempt(a, cv, order, lo, suffix, tol);
        if (!at.tangent) {
            if (at.count % 2 == 1) {
                std::ostringstream os;
                os << "branch cut crosses the eigenphase curves " << at.count << " times";
                throw ObstructionError(os.str(), 1, at.count);
            }
            if (at.count == 0) {
                at.cut.clearance = cut_clearance(a, at.cut.phi);
                return at.cut;
            }
        }
        // even but nonzero, or touching: move the suffix towards 1/2 and retry
        if (suffix + 1 >= half) break;
        suffix = suffix + std::max(1, (half - suffix) / 2);
    }
    throw BranchPointError("no admissible branch cut for the generic approximant");
}

}  // namespace

BranchCut branch_cut(const ApproximantFamily& f, const Tolerances& tol) {
    BranchCut cut;
    switch (f.kind) {
        case ApproxKind::direct:
            cut.phi.assign(static_cast<std::size_t>(f.app.n2), kPi);
            break;
        case ApproxKind::gap: cut = gap_cut(f, tol); break;
        case ApproxKind::gen: cut = gen_cut(f, tol); break;
    }
    cut.clearance = cut_clearance(f.app, cut.phi);
    if (cut.clearance <= tol.resolvent) {
        std::ostringstream os;
        os << "branch cut meets the spectrum (clearance " << cut.clearance << ")";
        throw BranchPointError(os.str());
    }
    return cut;
}

std::vector<CMat> good_log(const ApproximantFamily& f, const BranchCut& cut, const Tolerances& tol) {
    const MatchingFamily& a = f.app;
    std::vector<CMat> h(static_cast<std::size_t>(a.n2));
    const CMat one = CMat::Identity(a.m(), a.m());
    for (int j = 0; j < a.n2; ++j) {
        const double phi = cut.phi[static_cast<std::size_t>(j)];
        h[static_cast<std::size_t>(j)] =
            hermitize((phi - kPi) * one + cayley_log(std::exp(kI * (kPi - phi)) * a.at(j), tol));
    }
    for (int j = 0; j < a.n2; ++j) {
        const double jump = op_norm(h[static_cast<std::size_t>((j + 1) % a.n2)] - h[static_cast<std::size_t>(j)]);
        // an eigenvalue through the cut moves h by ~2 pi; eigenvectors that
        // turn quickly near a narrow gap move it by less
        if (jump > kPi) {
            std::ostringstream os;
            os << "logarithm jumps by " << jump << " near k2 = " << a.k2(j);
            throw BranchPointError(os.str());
        }
    }
    return h;
}

// ---- beta ---------------------------------------------------------------------

CMat BetaFamily::at(double k1, int j2) const {
    const std::size_t j = static_cast<std::size_t>(((j2 % n2) + n2) % n2);
    const double r = std::floor(k1 + 0.5);
    const double x = k1 - r;
    CMat b = expi_hermitian(h[j], -x) * expi_hermitian(htilde[j], -x);
    const int steps = static_cast<int>(r);
    if (steps > 0) {
        const CMat inv = alpha[j].adjoint();
        for (int s = 0; s < steps; ++s) b = inv * b;
    } else {
        for (int s = 0; s < -steps; ++s) b = alpha[j] * b;
    }
    return b;
}

BetaChecks check_beta(const BetaFamily& b) {
    BetaChecks c;
    const int n1 = b.n1, n2 = b.n2;
    // samples on k1 in [-1/2, 3/2]
    const int lo = -n1 / 2, hi = 3 * n1 / 2;
    const int w = hi - lo + 1;
    std::vector<CMat> grid(static_cast<std::size_t>(w) * n2);
    auto idx = [&](int j1, int j2) { return static_cast<std::size_t>(j2) * w + static_cast<std::size_t>(j1 - lo); };
#pragma omp parallel for schedule(static)
    for (int j2 = 0; j2 < n2; ++j2)
        for (int j1 = lo; j1 <= hi; ++j1) grid[idx(j1, j2)] = b.at(static_cast<double>(j1) / n1, j2);
    for (int j2 = 0; j2 < n2; ++j2) {
        for (int j1 = lo; j1 <= hi; ++j1) {
            const CMat& x = grid[idx(j1, j2)];
            if (j1 < hi) c.continuity = std::max(c.continuity, op_norm(grid[idx(j1 + 1, j2)] - x));
            c.continuity = std::max(c.continuity, op_norm(grid[idx(j1, (j2 + 1) % n2)] - x));
            if (j1 + n1 <= hi)
                c.defect = std::max(c.defect, op_norm(x.adjoint() * b.alpha[static_cast<std::size_t>(j2)] *
                                                          grid[idx(j1 + n1, j2)] -
                                                      CMat::Identity(x.rows(), x.cols())));
            if (-j1 >= lo && -j1 <= hi) {
                const CMat& y = grid[idx(-j1, (n2 - j2) % n2)];
                c.trs = std::max(c.trs, op_norm(y - b.eps.adjoint() * x.conjugate() * b.eps));
            }
        }
        c.normalization = std::max(c.normalization, op_norm(grid[idx(0, j2)] - CMat::Identity(b.eps.rows(), b.eps.cols())));
    }
    return c;
}

namespace {

bool direct_admissible(const MatchingFamily& a, double margin) {
    std::vector<double> phi(static_cast<std::size_t>(a.n2), kPi);
    return cut_clearance(a, phi) > margin;
}

}  // namespace

BetaBuild build_beta(const MatchingFamily& a, bool want_trs, int n1, const ApproxOptions& opt, const Tolerances& tol) {
    BetaBuild out;
    const auto gp = graf_porta_index(a, tol);
    out.index = gp.bit;
    if (want_trs && gp.bit == 1) {
        int crossings = -1;
        try {
            branch_cut(build_alpha_gen(a, opt, tol), tol);
        } catch (const ObstructionError& e) {
            crossings = e.crossings();
        } catch (const Error&) {
        }
        throw ObstructionError("no time-reversal symmetric frame: the Z2 index is 1", 1, crossings);
    }
    if (opt.allow_direct && direct_admissible(a, opt.direct_margin)) {
        out.approximant.base = a;
        out.approximant.app = a;
        out.approximant.app.eval = nullptr;
        out.approximant.kind = ApproxKind::direct;
        out.approximant.stages.push_back("direct");
    } else if (want_trs) {
        out.approximant = build_alpha_gen(a, opt, tol);
    } else {
        out.approximant = build_alpha_gap(a, opt, tol);
    }
    try {
        out.cut = branch_cut(out.approximant, tol);
    } catch (const ObstructionError& e) {
        throw InternalConsistencyError(std::string("index 0 but the branch cut reports an obstruction: ") + e.what());
    }
    BetaFamily& b = out.beta;
    b.n1 = n1;
    b.n2 = a.n2;
    b.eps = a.eps;
    b.alpha = a.alpha;
    b.h = good_log(out.approximant, out.cut, tol);
    b.htilde.resize(b.h.size());
    for (int j = 0; j < a.n2; ++j) {
        const CMat half = expi_hermitian(b.h[static_cast<std::size_t>(j)], -0.5);
        const CMat at = polar_unitarize(half * a.at(j) * half, tol);
        b.htilde[static_cast<std::size_t>(j)] = hermitize(cayley_log(at, tol));
    }
    b.satisfies_trs = want_trs;
    return out;
}

FrameField assemble_frame_2d(const BaseLine& base, const BetaFamily& beta) {
    const int n1 = base.n1, n2 = base.alpha.n2;
    FrameField f(2, n1, n2);
#pragma omp parallel for schedule(static)
    for (int b = 0; b <= n2; ++b) {
        const int bb = b % n2;
        const CMat& xi = base.base.frame.at(bb);
        for (int a = 0; a <= n1; ++a)
            f.at(a, b) = base.lines[static_cast<std::size_t>(bb)].at(a) * xi * beta.at(static_cast<double>(a) / n1, bb);
    }
    f.is_periodic = true;
    f.is_trs = beta.satisfies_trs;
    return f;
}

Frame2d construct_frame_2d(const ProjectorFamily& p, bool want_trs, const ApproxOptions& opt,
                           const TransportOptions& topt, const Tolerances& tol) {
    Frame2d out;
    out.base = matching_family(p, topt, Exec::parallel, tol);
    out.beta = build_beta(out.base.alpha, want_trs, out.base.n1, opt, tol);
    out.frame = assemble_frame_2d(out.base, out.beta.beta);
    return out;
}

// ---- homotopy -----------------------------------------------------------------

Homotopy homotopy_between(const MatchingFamily& a0, const MatchingFamily& a1, int samples, const ApproxOptions& opt,
                          const Tolerances& tol) {
    if (a0.n2 != a1.n2 || a0.m() != a1.m()) throw ShapeError("families live on different grids");
    if (samples < 2) throw ShapeError("need at least two samples");
    const int i0 = graf_porta_index(a0, tol).bit;
    const int i1 = graf_porta_index(a1, tol).bit;
    if (i0 != i1) {
        std::ostringstream os;
        os << "indices differ (" << i0 << " vs " << i1 << ")";
        throw ObstructionError(os.str(), i0 ^ i1);
    }
    const auto f0 = factorize_family(a0, tol);
    const CMat& eps = a0.eps;
    const int n2 = a0.n2;
    // alpha = eps^{-1} conj(gamma0(-k)) eps alpha1 gamma0^*, a TRS family of index 0
    MatchingFamily rel;
    rel.n2 = n2;
    rel.eps = eps;
    rel.alpha.resize(static_cast<std::size_t>(n2));
    for (int j = 0; j < n2; ++j) {
        const CMat& g = f0.gamma[static_cast<std::size_t>(j)];
        const CMat& gm = f0.gamma[static_cast<std::size_t>(a0.neg(j))];
        rel.alpha[static_cast<std::size_t>(j)] = polar_unitarize(eps.adjoint() * gm.conjugate() * eps * a1.at(j) * g.adjoint(), tol);
    }
    Homotopy out;
    out.beta = build_beta(rel, true, 2, opt, tol);
    const auto& b = out.beta.beta;
    for (int q = 0; q < samples; ++q) {
        const double s = static_cast<double>(q) / (samples - 1);
        MatchingFamily fam;
        fam.n2 = n2;
        fam.eps = eps;
        fam.alpha.resize(static_cast<std::size_t>(n2));
        for (int j = 0; j < n2; ++j) {
            const CMat& g = f0.gamma[static_cast<std::size_t>(j)];
            const CMat& gm = f0.gamma[static_cast<std::size_t>(a0.neg(j))];
            fam.alpha[static_cast<std::size_t>(j)] =
                eps.adjoint() * gm.transpose() * eps * b.at(-0.5 * s, j) * b.at(0.5 * s, j).adjoint() * g;
        }
        out.s.push_back(s);
        out.path.push_back(std::move(fam));
    }
    for (int j = 0; j < n2; ++j) {
        out.endpoint_residual = std::max(out.endpoint_residual, op_norm(out.path.front().at(j) - a0.at(j)));
        out.endpoint_residual = std::max(out.endpoint_residual, op_norm(out.path.back().at(j) - a1.at(j)));
    }
    return out;
}

}  // namespace symfr
