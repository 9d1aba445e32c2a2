#include <algorithm>
#include <cmath>
#include <sstream>

#include "symfr/errors.hpp"
#include "symfr/z2.hpp"

namespace symfr {

namespace {

int mod2(double x) { return static_cast<int>(((std::lround(x) % 2) + 2) % 2); }

double off_integer(double x) { return std::abs(x - std::round(x)); }

// one representative phase per Kramers pair, in [0, 2 pi) after rounding to 1e-4
std::vector<double> pair_phases(const CMat& u) {
    const auto e = eig_unitary(u);
    std::vector<double> ph;
    for (Eigen::Index i = 0; i < e.phases.size(); ++i) {
        double x = std::round(wrap_angle(e.phases(i), 0.0) / 1e-4) * 1e-4;
        if (x >= kTwoPi - 0.5e-4) x = 0.0;
        ph.push_back(x);
    }
    std::sort(ph.begin(), ph.end());
    std::vector<double> rep;
    for (std::size_t i = 0; i + 1 < ph.size(); i += 2) rep.push_back(ph[i]);
    return rep;
}

// continuous argument of det alpha on [0, 1/2], starting at the principal value
std::vector<double> det_phase(const MatchingFamily& a) {
    const int half = a.n2 / 2;
    std::vector<double> phi(static_cast<std::size_t>(half + 1));
    cplx prev = a.at(0).determinant();
    phi[0] = std::arg(prev);
    for (int j = 1; j <= half; ++j) {
        const cplx d = a.at(j).determinant();
        const double step = std::arg(d / prev);
        if (std::abs(step) > kPi / 2) {
            std::ostringstream os;
            os << "det alpha moves by " << step << " between grid nodes near k2 = " << a.k2(j);
            throw UnderResolvedError(os.str());
        }
        phi[static_cast<std::size_t>(j)] = phi[static_cast<std::size_t>(j - 1)] + step;
        prev = d;
    }
    return phi;
}

}  // namespace

// ---- matching-family formulas -------------------------------------------------

GrafPortaIndex graf_porta_index(const MatchingFamily& a, const Tolerances& tol) {
    GrafPortaIndex out;
    const int half = a.n2 / 2;
    out.factors = factorize_family(a, tol);
    const auto phi = det_phase(a);
    const double delta = phi.back() - phi.front();
    double mu = 0.0, nu = 0.0;
    for (double x : pair_phases(a.at(0))) mu += x;
    for (double x : pair_phases(a.at(half))) nu += x;
    out.via_pairs = (delta + 2.0 * mu - 2.0 * nu) / kTwoPi;
    const cplx c0 = out.factors.gamma_zero.determinant();
    const cplx ch = out.factors.gamma_half.determinant();
    out.via_gamma = (delta + 2.0 * std::arg(c0 / ch)) / kTwoPi;
    std::vector<cplx> dets;
    for (const auto& g : out.factors.gamma) dets.push_back(g.determinant());
    out.via_degree = winding_real(dets, tol);
    out.residual = std::max({off_integer(out.via_pairs), off_integer(out.via_gamma), off_integer(out.via_degree)});
    if (out.residual > tol.integer) {
        std::ostringstream os;
        os << "index formulas are not integral (residual " << out.residual << ")";
        throw NonIntegerDegreeError(os.str());
    }
    const int b1 = mod2(out.via_pairs), b2 = mod2(out.via_gamma), b3 = mod2(out.via_degree);
    if (b1 != b2 || b2 != b3) {
        std::ostringstream os;
        os << "index formulas disagree: " << out.via_pairs << ", " << out.via_gamma << ", " << out.via_degree;
        throw InternalConsistencyError(os.str());
    }
    out.bit = b1;
    return out;
}

int crossing_count_index(const MatchingFamily& a, const ApproxOptions& opt, const Tolerances& tol) {
    const auto gen = build_alpha_gen(a, opt, tol);
    try {
        branch_cut(gen, tol);
    } catch (const ObstructionError& e) {
        return e.crossings() % 2;
    }
    return 0;
}

TrimIndex trim_endpoint_index(const MatchingFamily& a, const Tolerances& tol) {
    TrimIndex out;
    const auto phi = det_phase(a);
    Tolerances loose = tol;
    loose.skew = 1e-6;
    auto ratio = [&](int j, double ph) {
        const cplx pf = pfaffian(a.eps * a.at(j), loose);
        return pf / std::exp(kI * (0.5 * ph));
    };
    out.ratio_zero = ratio(0, phi.front());
    out.ratio_half = ratio(a.n2 / 2, phi.back());
    out.bit = (out.ratio_zero * out.ratio_half).real() < 0.0 ? 1 : 0;
    return out;
}

FmpIndex fmp_delta(const MatchingFamily& a, const Tolerances& tol) {
    FmpIndex out;
    const int n2 = a.n2, half = n2 / 2;
    const CMat& eps = a.eps;
    // square roots of alpha^{-1} at the Kramers points, cut in the widest gap
    auto root = [&](const CMat& u) {
        const CMat inv = u.adjoint();
        return CMat(expi_hermitian(spectral_log(inv, largest_gap_midpoint(inv), tol), 0.5));
    };
    const CMat s0 = root(a.at(0));
    const CMat sh = root(a.at(half));
    const CMat x = polar_unitarize(sh.adjoint() * s0, tol);
    const CMat X = spectral_log(x, largest_gap_midpoint(x), tol);
    // k2 = j / n2 for j in [-half, half)
    std::vector<CMat> left(static_cast<std::size_t>(half + 1));  // left[q] = U~(-q / n2)
    for (int q = 0; q <= half; ++q) left[static_cast<std::size_t>(q)] = sh * expi_hermitian(X, 1.0 - 2.0 * q / n2);
    std::vector<cplx> dets;
    for (int j = -half; j < half; ++j) {
        CMat u;
        if (j <= 0) {
            u = left[static_cast<std::size_t>(-j)];
        } else {
            u = a.at(j).adjoint() * eps.adjoint() * left[static_cast<std::size_t>(j)].conjugate() * eps;
        }
        dets.push_back(u.determinant());
    }
    // both definitions at the seams
    for (int j : {0, half}) {
        const CMat& l = left[static_cast<std::size_t>(j)];
        out.trs_residual =
            std::max(out.trs_residual, op_norm(a.at(j).adjoint() * eps.adjoint() * l.conjugate() * eps - l));
    }
    out.degree = winding_real(dets, tol);
    if (off_integer(out.degree) > tol.integer) throw NonIntegerDegreeError("edge degree is not integral");
    out.bit = mod2(out.degree);
    const auto f = factorize_family(a, tol);
    std::vector<cplx> gd;
    for (const auto& g : f.gamma) gd.push_back(g.determinant());
    out.gamma_degree = winding_real(gd, tol);
    return out;
}

ProdanIndex prodan_index(const ProjectorFamily& p, const BaseLine& base, const TransportOptions& opt,
                         const Tolerances& tol) {
    ProdanIndex out;
    const MatchingFamily& a = base.alpha;
    const CMat& eps = a.eps;
    const auto phi = det_phase(a);
    const int half = a.n2 / 2;
    for (int which = 0; which < 2; ++which) {
        const int j = which == 0 ? 0 : half;
        const double ks = a.k2(j);
        const CMat& xi0 = base.base.frame.at(j);
        const CMat xis = symmetric_frame_at_point(p(-0.5, ks), p.theta(), tol);
        const CMat g = xi0.adjoint() * parallel_transport(p, ks, -0.5, 0.0, opt) * xis;
        out.residual_left = std::max(out.residual_left, op_norm(g * eps * g.transpose() * eps.adjoint() - a.at(j)));
        out.residual_right = std::max(out.residual_right, op_norm(eps.adjoint() * g.transpose() * eps * g - a.at(j)));
        const cplx r = g.determinant() / std::exp(kI * (0.5 * phi[static_cast<std::size_t>(which == 0 ? 0 : half)]));
        (which == 0 ? out.ratio_zero : out.ratio_half) = r;
    }
    out.product = (out.ratio_zero * out.ratio_half).real();
    out.bit = out.product < 0.0 ? 1 : 0;
    return out;
}

// ---- curvature ----------------------------------------------------------------

CurvatureGrid berry_curvature(const ProjectorFamily& p, double h) {
    if (p.dim() != 2) throw DimensionError("curvature needs a 2-d family");
    CurvatureGrid c;
    c.n1 = p.grid().n1;
    c.n2 = p.grid().n2;
    c.F.assign(static_cast<std::size_t>(c.n1) * c.n2, 0.0);
    std::vector<double> imag(c.F.size(), 0.0);
#pragma omp parallel for schedule(dynamic) collapse(2)
    for (int j2 = 0; j2 < c.n2; ++j2)
        for (int j1 = 0; j1 < c.n1; ++j1) {
            const double k1 = static_cast<double>(j1) / c.n1, k2 = static_cast<double>(j2) / c.n2;
            const CMat P = p(k1, k2);
            const CMat d1 = (p(k1 + h, k2) - p(k1 - h, k2)) / (2.0 * h);
            const CMat d2 = (p(k1, k2 + h) - p(k1, k2 - h)) / (2.0 * h);
            const cplx f = -kI * (P * (d1 * d2 - d2 * d1)).trace();
            const std::size_t i = static_cast<std::size_t>(j2) * c.n1 + j1;
            c.F[i] = f.real();
            imag[i] = std::abs(f.imag());
        }
    c.max_imag = imag.empty() ? 0.0 : *std::max_element(imag.begin(), imag.end());
    return c;
}

double chern_from_curvature(const CurvatureGrid& c) {
    double s = 0.0;
    for (double f : c.F) s += f;
    return s / (static_cast<double>(c.n1) * c.n2) / kTwoPi;
}

double half_torus_flux(const CurvatureGrid& c) {
    const int half = c.n2 / 2;
    double s = 0.0;
    for (int j2 = 0; j2 <= half; ++j2) {
        const double w = (j2 == 0 || j2 == half) ? 0.5 : 1.0;
        for (int j1 = 0; j1 < c.n1; ++j1) s += w * c.at(j1, j2);
    }
    return s / (static_cast<double>(c.n1) * c.n2) / kTwoPi;
}

double chern_link_variable(const ProjectorFamily& p) {
    const int n1 = p.grid().n1, n2 = p.grid().n2, m = p.m();
    std::vector<CMat> phi(static_cast<std::size_t>(n1) * n2);
    for (int j2 = 0; j2 < n2; ++j2)
        for (int j1 = 0; j1 < n1; ++j1) {
            Eigen::SelfAdjointEigenSolver<CMat> es(p.node(j1, j2));
            phi[static_cast<std::size_t>(j2) * n1 + j1] = es.eigenvectors().rightCols(m);
        }
    auto at = [&](int j1, int j2) -> const CMat& {
        return phi[static_cast<std::size_t>((j2 + n2) % n2) * n1 + static_cast<std::size_t>((j1 + n1) % n1)];
    };
    auto link = [&](int a1, int a2, int b1, int b2) { return (at(a1, a2).adjoint() * at(b1, b2)).determinant(); };
    double s = 0.0;
    for (int j2 = 0; j2 < n2; ++j2)
        for (int j1 = 0; j1 < n1; ++j1) {
            const cplx w = link(j1, j2, j1 + 1, j2) * link(j1 + 1, j2, j1 + 1, j2 + 1) *
                           link(j1 + 1, j2 + 1, j1, j2 + 1) * link(j1, j2 + 1, j1, j2);
            s += std::arg(w);
        }
    return s / kTwoPi;
}

// ---- geometric formula --------------------------------------------------------

GeometricIndex fu_kane_geometric(const ProjectorFamily& p, const FrameField& loop_zero, const FrameField& loop_half,
                                 const Tolerances& tol) {
    GeometricIndex out;
    const auto curv = berry_curvature(p);
    out.grid = p.grid().n1;
    out.flux_half = half_torus_flux(curv);
    out.loop_zero = berry_connection_trace(loop_zero).loop_links;
    out.loop_half = berry_connection_trace(loop_half).loop_links;
    const double loops = (out.loop_half - out.loop_zero) / kTwoPi;
    out.value = out.flux_half + loops;
    out.printed_variant = out.flux_half - loops;
    if (off_integer(out.value) > tol.integer) {
        std::ostringstream os;
        os << "geometric formula not integral: " << out.value;
        throw QuadratureError(os.str());
    }
    out.bit = mod2(out.value);
    return out;
}

GeometricIndex fu_kane_geometric(const ProjectorFamily& p, const TransportOptions& opt, const Tolerances& tol,
                                 int max_grid) {
    ProjectorFamily q = p;
    for (;;) {
        const auto f0 = construct_frame_1d(q.restrict_line(0.0), opt, tol);
        const auto fh = construct_frame_1d(q.restrict_line(0.5), opt, tol);
        try {
            return fu_kane_geometric(q, f0.frame, fh.frame, tol);
        } catch (const QuadratureError&) {
            const int n1 = q.grid().n1 * 2, n2 = q.grid().n2 * 2;
            if (std::max(n1, n2) > max_grid) throw;
            q = p.with_grid(KGrid::make(n1, n2));
        }
    }
}

// ---- sewing matrix and Pfaffians ---------------------------------------------

SewingMatrix sewing_matrix(const FrameField& f, const TimeReversal& theta) {
    if (f.dim != 2) throw DimensionError("sewing matrix needs a 2-d frame");
    SewingMatrix s;
    s.n1 = f.n1;
    s.n2 = f.n2;
    s.w.resize(static_cast<std::size_t>(f.n1) * f.n2);
#pragma omp parallel for schedule(static) collapse(2)
    for (int j2 = 0; j2 < f.n2; ++j2)
        for (int j1 = 0; j1 < f.n1; ++j1) {
            const CMat& minus = f.at((f.n1 - j1) % f.n1, (f.n2 - j2) % f.n2);
            s.w[static_cast<std::size_t>(j2) * f.n1 + j1] = minus.adjoint() * theta.apply(f.at(j1, j2));
        }
    return s;
}

PfaffianIndex fu_kane_pfaffian(const FrameField& f, const TimeReversal& theta, const Tolerances& tol) {
    if (f.n1 % 2 != 0 || f.n2 % 2 != 0) throw ShapeError("Kramers points need even grids");
    const auto s = sewing_matrix(f, theta);
    const int h1 = f.n1 / 2, h2 = f.n2 / 2;
    // (0,0) -> (1/2,0) -> (1/2,-1/2) -> (0,-1/2) -> (0,0)
    std::vector<std::pair<int, int>> path;
    for (int j = 0; j <= h1; ++j) path.emplace_back(j, 0);
    for (int j = 1; j <= h2; ++j) path.emplace_back(h1, (f.n2 - j) % f.n2);
    for (int j = h1 - 1; j >= 0; --j) path.emplace_back(j, h2);
    for (int j = h2 + 1; j <= f.n2; ++j) path.emplace_back(0, j % f.n2);
    const std::array<std::pair<int, int>, 4> trim{{{0, 0}, {h1, 0}, {h1, h2}, {0, h2}}};

    PfaffianIndex out;
    Tolerances loose = tol;
    loose.skew = 1e-6;
    for (int t = 0; t < 4; ++t) {
        const CMat& w = s.at(trim[t].first, trim[t].second);
        out.skewness = std::max(out.skewness, op_norm(w + w.transpose()));
        out.pf[static_cast<std::size_t>(t)] = pfaffian(w, loose);
    }
    cplx root = out.pf[0];
    cplx prev = s.at(0, 0).determinant();
    out.sqrt_det[0] = root;
    int next_trim = 1;
    for (std::size_t i = 1; i < path.size(); ++i) {
        const cplx d = s.at(path[i].first, path[i].second).determinant();
        const double step = std::arg(d / prev);
        if (std::abs(step) > kPi / 2) {
            std::ostringstream os;
            os << "det w jumps by " << step << " between neighbouring nodes";
            throw UnderResolvedError(os.str());
        }
        root *= std::exp(kI * (0.5 * step)) * std::sqrt(std::abs(d) / std::abs(prev));
        prev = d;
        if (next_trim < 4 && path[i] == trim[static_cast<std::size_t>(next_trim)]) {
            out.sqrt_det[static_cast<std::size_t>(next_trim)] = root;
            ++next_trim;
        }
    }
    out.loop_closure = std::abs(root - out.pf[0]);
    cplx prod = 1.0;
    for (int t = 0; t < 4; ++t) prod *= out.pf[static_cast<std::size_t>(t)] / out.sqrt_det[static_cast<std::size_t>(t)];
    out.product = prod.real();
    out.bit = out.product < 0.0 ? 1 : 0;
    return out;
}

// ---- report -------------------------------------------------------------------

Z2Report full_report(const ProjectorFamily& p, const Z2Options& opt, const Tolerances& tol) {
    Z2Report r;
    r.model = p.name();
    r.n1 = p.grid().n1;
    r.n2 = p.grid().n2;
    const BaseLine base = matching_family(p, opt.transport, Exec::parallel, tol);
    r.graf_porta = graf_porta_index(base.alpha, tol);
    r.index = r.graf_porta.bit;
    r.trim = trim_endpoint_index(base.alpha, tol);
    r.chern = chern_link_variable(p);

    auto attempt = [&](const char* what, bool& flag, auto&& fn) {
        try {
            fn();
            flag = true;
        } catch (const ObstructionError&) {
            throw;
        } catch (const Error& e) {
            r.notes.push_back(std::string(what) + ": " + e.what());
        }
    };
    if (opt.geometric) attempt("geometric", r.has_geometric, [&] { r.geometric = fu_kane_geometric(p, opt.transport, tol, opt.max_grid); });
    if (opt.fmp) attempt("fmp", r.has_fmp, [&] { r.fmp = fmp_delta(base.alpha, tol); });
    if (opt.prodan) attempt("prodan", r.has_prodan, [&] { r.prodan = prodan_index(p, base, opt.transport, tol); });
    if (opt.crossing) attempt("crossing", r.has_crossing, [&] { r.crossing_bit = crossing_count_index(base.alpha, opt.approx, tol); });
    if (opt.pfaffian)
        attempt("pfaffian", r.has_pfaffian, [&] {
            const auto b = build_beta(base.alpha, false, base.n1, opt.approx, tol);
            r.pfaffian = fu_kane_pfaffian(assemble_frame_2d(base, b.beta), p.theta(), tol);
        });

    std::ostringstream bad;
    auto compare = [&](const char* name, bool has, int bit) {
        if (has && bit != r.index) bad << name << "=" << bit << " ";
    };
    compare("trim", true, r.trim.bit);
    compare("geometric", r.has_geometric, r.geometric.bit);
    compare("fmp", r.has_fmp, r.fmp.bit);
    compare("prodan", r.has_prodan, r.prodan.bit);
    compare("crossing", r.has_crossing, r.crossing_bit);
    compare("pfaffian", r.has_pfaffian, r.pfaffian.bit);
    if (!bad.str().empty())
        throw EqualityViolationError("definitions disagree with index " + std::to_string(r.index) + ": " + bad.str());
    return r;
}

}  // namespace symfr
