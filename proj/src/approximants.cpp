// Approximants of a matching family with a prescribed spectral pattern:
// Poisson smoothing, local eigenvalue splitting (bump perturbations and
// Kato-Nagy interpolation) and the gap / generic pipelines built from them.

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "symfr/errors.hpp"
#include "symfr/frames2d.hpp"

namespace symfr {

namespace {

CMat hermitize(const CMat& h) { return 0.5 * (h + h.adjoint()); }

std::vector<double> sorted_phases(const CMat& u) {
    const auto e = eig_unitary(u);
    std::vector<double> ph(e.phases.data(), e.phases.data() + e.phases.size());
    std::sort(ph.begin(), ph.end());
    return ph;
}

double sup_distance(const MatchingFamily& a, const MatchingFamily& b) {
    double d = 0.0;
    for (int j = 0; j < a.n2; ++j) d = std::max(d, op_norm(a.at(j) - b.at(j)));
    return d;
}

MatchingFamily strip(const MatchingFamily& a) {
    MatchingFamily out = a;
    out.eval = nullptr;
    return out;
}

// alpha(-k) := eps^{-1} alpha(k)^t eps for k in (0, 1/2); nodes 0 and 1/2 are left alone
void reflect_trs(MatchingFamily& a) {
    const int half = a.n2 / 2;
    for (int j = 1; j < half; ++j) a.alpha[a.neg(j)] = a.eps.adjoint() * a.alpha[j].transpose() * a.eps;
}

// exact TRS at the fixed points and by reflection elsewhere
void symmetrize_trs(MatchingFamily& a) {
    for (int c : {0, a.n2 / 2}) {
        CMat& u = a.alpha[c];
        u = polar_unitarize(0.5 * (u + a.eps.adjoint() * u.transpose() * a.eps));
    }
    reflect_trs(a);
}

// ---- clusters and Riesz projectors -----------------------------------------

struct Cluster {
    double theta = 0.0;  // mean phase at the center node
    int size = 0;
    double radius = 0.0; // contour |z - e^{i theta}| = radius
    int quad = 64;
};

// groups of eigenphases whose circular neighbours are closer than `gap`
std::vector<std::pair<double, int>> group_phases(const std::vector<double>& ph, double gap) {
    const int m = static_cast<int>(ph.size());
    // start after the largest gap so that no group straddles the seam
    int start = 0;
    double widest = -1.0;
    for (int i = 0; i < m; ++i) {
        const double g = i + 1 < m ? ph[i + 1] - ph[i] : ph[0] + kTwoPi - ph[m - 1];
        if (g > widest) {
            widest = g;
            start = (i + 1) % m;
        }
    }
    std::vector<std::pair<double, int>> out;
    double sum = 0.0, first = 0.0, prev = 0.0;
    int count = 0;
    for (int q = 0; q < m; ++q) {
        const int i = (start + q) % m;
        double x = ph[i];
        if (count > 0) {
            x = prev + angle_diff(x, prev);
            if (x - prev >= gap) {
                out.emplace_back(sum / count, count);
                sum = 0.0;
                count = 0;
            }
        }
        if (count == 0) first = x;
        (void)first;
        sum += x;
        prev = x;
        ++count;
    }
    out.emplace_back(sum / count, count);
    return out;
}

// Fix one contour per cluster valid on every node of the window: the cluster
// keeps exactly `size` eigenvalues inside, the rest stay outside.
std::vector<Cluster> fix_contours(const MatchingFamily& a, const std::vector<int>& window,
                                  const std::vector<std::pair<double, int>>& groups) {
    std::vector<Cluster> out;
    for (const auto& [theta, size] : groups) {
        Cluster c;
        c.theta = theta;
        c.size = size;
        const cplx z = std::exp(kI * theta);
        double inner = 0.0, outer = 1e300;
        for (int j : window) {
            const auto e = eig_unitary(a.at(j));
            std::vector<double> d;
            for (Eigen::Index i = 0; i < e.phases.size(); ++i) d.push_back(std::abs(std::exp(kI * e.phases(i)) - z));
            std::sort(d.begin(), d.end());
            inner = std::max(inner, d[size - 1]);
            if (size < static_cast<int>(d.size())) outer = std::min(outer, d[size]);
        }
        if (!(inner < outer)) {
            std::ostringstream os;
            os << "cluster at phase " << theta << " overlaps its neighbours on the window";
            throw BudgetError(os.str());
        }
        c.radius = outer > 1e299 ? inner + 0.5 : 0.5 * (inner + outer);
        const double q = std::max(inner / c.radius, outer > 1e299 ? 0.0 : c.radius / outer);
        c.quad = q <= 0.0 ? 32 : static_cast<int>(std::clamp(std::ceil(std::log(1e-15) / std::log(q)), 32.0, 4096.0));
        out.push_back(c);
    }
    // each eigenvalue in exactly one circle, or the projectors double count
    for (int j : window) {
        const auto e = eig_unitary(a.at(j));
        for (Eigen::Index i = 0; i < e.phases.size(); ++i) {
            int hits = 0;
            for (const auto& c : out) hits += std::abs(std::exp(kI * e.phases(i)) - std::exp(kI * c.theta)) < c.radius;
            if (hits != 1) throw BudgetError("contours do not partition the spectrum at node " + std::to_string(j));
        }
    }
    return out;
}

// (1 / 2 pi i) oint (zeta - u)^{-1} d zeta by the trapezoid rule on the circle
CMat riesz_projector(const CMat& u, const Cluster& c) {
    const Eigen::Index n = u.rows();
    const cplx z = std::exp(kI * c.theta);
    CMat acc = CMat::Zero(n, n);
    const CMat one = CMat::Identity(n, n);
    for (int q = 0; q < c.quad; ++q) {
        const cplx w = c.radius * std::exp(kI * (kTwoPi * q / c.quad));
        acc += w * (one * (z + w) - u).partialPivLu().inverse();
    }
    return hermitize(acc / static_cast<double>(c.quad));
}

// orthonormal basis of the range of a projector of rank r
CMat range_basis(const CMat& pi, int r) {
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(pi));
    return es.eigenvectors().rightCols(r);
}

// Kato-Nagy unitary taking Ran pi0 onto Ran pi
CMat kato_nagy(const CMat& pi, const CMat& pi0) {
    const Eigen::Index n = pi.rows();
    const CMat one = CMat::Identity(n, n);
    const CMat d = pi - pi0;
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(one - d * d));
    RVec s(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (es.eigenvalues()(i) <= 1e-12) throw BudgetError("projectors too far apart for the Kato-Nagy map");
        s(i) = 1.0 / std::sqrt(es.eigenvalues()(i));
    }
    return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().adjoint() * (pi * pi0 + (one - pi) * (one - pi0));
}

double bump(double x, double s) {
    const double t = 2.0 * x / s;
    if (std::abs(t) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - t * t));
}

// ---- the three splitting modes ---------------------------------------------

SplitResult split_point(const MatchingFamily& a, int center, bool kramers, double s, double cluster_gap,
                        const Tolerances& tol) {
    SplitResult out{strip(a), 0.0, 0};
    const int m = a.m();
    std::vector<int> window;
    for (int d = -a.n2 / 2; d <= a.n2 / 2; ++d)
        if (std::abs(d) / static_cast<double>(a.n2) < 0.5 * s) window.push_back(center + d);
    const auto groups = group_phases(sorted_phases(a.at(center)), cluster_gap);
    out.clusters = static_cast<int>(groups.size());
    const int unit = kramers ? 2 : 1;
    int widest = 1;
    for (const auto& g : groups) widest = std::max(widest, g.second / unit);
    if (widest == 1) return out;  // nothing to split
    const auto contours = fix_contours(a, window, groups);
    // constant perturbation directions at the center
    const TimeReversal eps_c = make_time_reversal(a.eps, m);
    CMat direction = CMat::Zero(m, m);
    for (const auto& c : contours) {
        const CMat pi0 = riesz_projector(a.at(center), c);
        CMat basis;
        if (kramers) {
            // pi0 is eps-invariant up to the TRS residual of alpha; remove it
            basis = symmetric_frame_at_point(hermitize(0.5 * (pi0 + eps_c.conjugate_op(pi0))), eps_c, tol);
        } else {
            const CMat q = range_basis(pi0, c.size);
            const auto e = eig_unitary(q.adjoint() * a.at(center) * q);
            basis = q * e.vectors;
        }
        for (int l = 0; l < c.size / unit; ++l) {
            const CMat v = basis.middleCols(l * unit, unit);
            direction += static_cast<double>(l) * v * v.adjoint();
        }
    }
    const double amp = s / (widest - 1);
    for (int j : window) {
        const CMat& al = a.at(j);
        CMat h = CMat::Zero(m, m);
        CMat approx = CMat::Zero(m, m);
        for (const auto& c : contours) {
            const CMat pi = riesz_projector(al, c);
            h += c.theta * pi;
            approx += std::exp(kI * c.theta) * pi;
        }
        h += cayley_log(polar_unitarize(approx.adjoint() * al), tol);
        const double x = static_cast<double>(j - center) / a.n2;
        const CMat v = amp * bump(x, s) * direction;
        out.alpha.alpha[a.wrap(j)] = expi_hermitian(hermitize(h + v));
    }
    out.sup_distance = sup_distance(a, out.alpha);
    return out;
}

SplitResult split_crossing(const MatchingFamily& a, int center, int radius, double cluster_gap, const Tolerances& tol) {
    SplitResult out{strip(a), 0.0, 0};
    if (radius < 1) throw BudgetError("crossing window needs at least one node on each side");
    const int m = a.m();
    std::vector<int> window;
    for (int d = -radius; d <= radius; ++d) window.push_back(center + d);
    const auto groups = group_phases(sorted_phases(a.at(center)), cluster_gap);
    out.clusters = static_cast<int>(groups.size());
    const auto contours = fix_contours(a, window, groups);
    const int lo = center - radius, hi = center + radius;

    struct Side {
        CMat psi;      // m x p eigenvectors in increasing phase order
        RVec phase;
    };
    auto side = [&](int j, const Cluster& c, const CMat& pi) {
        const CMat q = range_basis(pi, c.size);
        const auto e = eig_unitary(q.adjoint() * a.at(j) * q);
        std::vector<std::pair<double, int>> order;
        for (int i = 0; i < c.size; ++i) order.emplace_back(c.theta + angle_diff(e.phases(i), c.theta), i);
        std::sort(order.begin(), order.end());
        Side sd{CMat(m, c.size), RVec(c.size)};
        for (int i = 0; i < c.size; ++i) {
            sd.phase(i) = order[i].first;
            sd.psi.col(i) = q * e.vectors.col(order[i].second);
            if (i > 0 && sd.phase(i) - sd.phase(i - 1) <= tol.degeneracy)
                throw BudgetError("degenerate spectrum at the edge of the crossing window");
        }
        return sd;
    };

    std::vector<CMat> hsum(window.size(), CMat::Zero(m, m));
    for (const auto& c : contours) {
        std::vector<CMat> pis;
        for (int j : window) pis.push_back(riesz_projector(a.at(j), c));
        const CMat& pi0 = pis[static_cast<std::size_t>(radius)];
        if (c.size == 1) {
            for (std::size_t w = 1; w + 1 < window.size(); ++w) {
                const cplx lam = (pis[w] * a.at(window[w])).trace();
                hsum[w] += (c.theta + angle_diff(std::arg(lam), c.theta)) * pis[w];
            }
            continue;
        }
        const Side left = side(lo, c, pis.front());
        const Side right = side(hi, c, pis.back());
        const CMat b0 = kato_nagy(pis.front(), pi0).adjoint() * left.psi;
        const CMat vmat = polar_unitarize(b0.adjoint() * kato_nagy(pis.back(), pi0).adjoint() * right.psi, tol);
        const CMat logv = spectral_log(vmat, largest_gap_midpoint(vmat), tol);
        for (std::size_t w = 1; w + 1 < window.size(); ++w) {
            const double x = static_cast<double>(w) / (2.0 * radius);
            const CMat wk = kato_nagy(pis[w], pi0);
            const CMat phi = wk * b0 * expi_hermitian(logv, x);
            for (int l = 0; l < c.size; ++l) {
                const double ph = (1.0 - x) * left.phase(l) + x * right.phase(l);
                hsum[w] += ph * phi.col(l) * phi.col(l).adjoint();
            }
        }
    }
    for (std::size_t w = 1; w + 1 < window.size(); ++w)
        out.alpha.alpha[a.wrap(window[w])] = expi_hermitian(hermitize(hsum[w]));
    out.sup_distance = sup_distance(a, out.alpha);
    return out;
}

}  // namespace

// ---- public -----------------------------------------------------------------

const char* to_string(ApproxKind k) {
    switch (k) {
        case ApproxKind::direct: return "direct";
        case ApproxKind::gap: return "gap";
        case ApproxKind::gen: return "gen";
    }
    return "?";
}

MatchingFamily analytic_smooth(const MatchingFamily& a, double nu, double* sup, const Tolerances& tol) {
    if (!(nu > 0.0)) throw SmoothingError("smoothing width must be positive");
    const int n = a.n2;
    // periodized Poisson kernel sum_r f_nu(k + r) on the grid, renormalized
    std::vector<double> w(n);
    double total = 0.0;
    const double a2 = kTwoPi * std::min(nu, 50.0);
    for (int d = 0; d < n; ++d) {
        w[d] = std::sinh(a2) / (std::cosh(a2) - std::cos(kTwoPi * d / n));
        total += w[d];
    }
    for (auto& x : w) x /= total;
    MatchingFamily out = strip(a);
    for (int j = 0; j < n; ++j) {
        CMat mu = CMat::Zero(a.m(), a.m());
        for (int d = 0; d < n; ++d) mu += w[d] * a.at(j - d);
        const Eigen::JacobiSVD<CMat> svd(mu);
        if (svd.singularValues().minCoeff() < 1e-3) {
            std::ostringstream os;
            os << "averaged family nearly singular at k2 = " << a.k2(j) << "; decrease nu";
            throw SmoothingError(os.str());
        }
        out.alpha[j] = polar_unitarize(mu, tol);
    }
    if (sup) *sup = sup_distance(a, out);
    return out;
}

SplitResult split_local(const MatchingFamily& a, int center, SplitMode mode, double s, int radius, double cluster_gap,
                        const Tolerances& tol) {
    switch (mode) {
        case SplitMode::full: return split_point(a, center, false, s, cluster_gap, tol);
        case SplitMode::kramers: {
            const int c = a.wrap(center);
            if (c != 0 && c != a.n2 / 2) throw ShapeError("Kramers splitting needs a half-integer center");
            return split_point(a, center, true, s, cluster_gap, tol);
        }
        case SplitMode::crossing: return split_crossing(a, center, radius, cluster_gap, tol);
    }
    throw ShapeError("unknown split mode");
}

namespace {

double interior_gap(const MatchingFamily& a, int j) { return min_phase_gap(a.at(j)); }

void note(ApproximantFamily& f, const std::string& what, double d) {
    std::ostringstream os;
    os << what << " (sup " << d << ")";
    f.stages.push_back(os.str());
}

// kramers split at 0 and 1/2 with shrinking s on budget failures
void split_half_integers(ApproximantFamily& f, const ApproxOptions& opt, const Tolerances& tol) {
    for (int c : {0, f.app.n2 / 2}) {
        double s = opt.s;
        for (int attempt = 0;; ++attempt) {
            try {
                auto r = split_local(f.app, c, SplitMode::kramers, s, 0, opt.cluster_tol, tol);
                if (r.sup_distance > opt.stage_budget) throw BudgetError("stage budget exceeded");
                if (r.sup_distance > 0.0) note(f, "kramers split at node " + std::to_string(c), r.sup_distance);
                f.app = std::move(r.alpha);
                break;
            } catch (const BudgetError& e) {
                if (attempt >= 3) throw ApproximantError(std::string("Kramers split failed: ") + e.what());
                s *= 0.5;
            }
        }
    }
}

}  // namespace

ApproximantFamily build_alpha_gen(const MatchingFamily& a, const ApproxOptions& opt, const Tolerances& tol) {
    ApproximantFamily f;
    f.base = a;
    f.kind = ApproxKind::gen;
    f.app = strip(a);
    symmetrize_trs(f.app);
    const int n2 = a.n2, half = n2 / 2;
    const double nu = opt.nu < 0.0 ? 0.25 / n2 : opt.nu;
    if (nu > 0.0) {
        double d = 0.0;
        f.app = analytic_smooth(f.app, nu, &d, tol);
        note(f, "smooth nu=" + std::to_string(nu), d);
    }
    split_half_integers(f, opt, tol);

    // a degeneracy that persists through (0, 1/2) is lifted at k2 = 1/4
    double widest = 0.0;
    for (int j = 1; j < half; ++j) widest = std::max(widest, interior_gap(f.app, j));
    if (widest < opt.cluster_tol) {
        const int a4 = half / 2;
        auto r = split_local(f.app, a4, SplitMode::full, opt.s, 0, opt.cluster_tol, tol);
        if (r.sup_distance > opt.stage_budget) throw ApproximantError("full split exceeds the stage budget");
        note(f, "full split at node " + std::to_string(a4), r.sup_distance);
        f.app = std::move(r.alpha);
        reflect_trs(f.app);
        double d = 0.0;
        f.app = analytic_smooth(f.app, opt.spread_nu, &d, tol);
        note(f, "spread nu=" + std::to_string(opt.spread_nu), d);
    }

    // isolated near-crossings inside (0, 1/2)
    std::vector<int> done;
    for (int iter = 0; iter < 4 * half; ++iter) {
        std::vector<double> g(half + 1);
        for (int j = 0; j <= half; ++j) g[j] = interior_gap(f.app, j);
        int pick = -1;
        for (int j = 1; j < half; ++j) {
            if (std::find(done.begin(), done.end(), j) != done.end()) continue;
            if (g[j] < opt.crossing_gap && g[j] < g[j - 1] && g[j] < g[j + 1] && (pick < 0 || g[j] < g[pick])) pick = j;
        }
        if (pick < 0) break;
        done.push_back(pick);
        int radius = std::min({std::max(1, static_cast<int>(std::lround(0.5 * opt.s * n2))), pick, half - pick});
        for (;;) {
            try {
                auto r = split_local(f.app, pick, SplitMode::crossing, 0.0, radius, opt.crossing_gap, tol);
                if (r.sup_distance > opt.window_budget) throw BudgetError("window budget exceeded");
                note(f, "crossing split at node " + std::to_string(pick) + " r=" + std::to_string(radius),
                     r.sup_distance);
                f.app = std::move(r.alpha);
                break;
            } catch (const BudgetError& e) {
                if (radius == 1) throw ApproximantError(std::string("crossing near node ") + std::to_string(pick) +
                                                        " not removable: " + e.what());
                radius /= 2;
            }
        }
    }
    reflect_trs(f.app);
    f.sup_distance = sup_distance(a, f.app);
    if (!(f.sup_distance < opt.total_budget) || !(f.sup_distance < 2.0))
        throw ApproximantError("approximant drifted " + std::to_string(f.sup_distance) + " from the family");
    const std::string bad = approximant_pattern_violation(f, tol);
    if (!bad.empty()) throw ApproximantError("generic pattern not reached: " + bad);
    return f;
}

ApproximantFamily build_alpha_gap(const MatchingFamily& a, const ApproxOptions& opt, const Tolerances& tol) {
    ApproximantFamily f = build_alpha_gen(a, opt, tol);
    f.kind = ApproxKind::gap;
    const int n2 = a.n2, half = n2 / 2;
    for (int c : {0, half}) {
        // eigenvectors turn by up to pi/2 across the window; a few nodes keep the log resolved
        int radius = std::max(1, std::min(std::max(2, static_cast<int>(std::lround(opt.s * n2))), half / 4));
        for (;;) {
            try {
                auto r = split_local(f.app, c, SplitMode::crossing, 0.0, radius, opt.crossing_gap, tol);
                if (r.sup_distance > opt.window_budget) throw BudgetError("window budget exceeded");
                note(f, "pair split at node " + std::to_string(c) + " r=" + std::to_string(radius), r.sup_distance);
                f.app = std::move(r.alpha);
                break;
            } catch (const BudgetError& e) {
                if (radius == 1) throw ApproximantError(std::string("cannot split the pairs at node ") +
                                                        std::to_string(c) + ": " + e.what());
                radius /= 2;
            }
        }
    }
    f.sup_distance = sup_distance(a, f.app);
    if (!(f.sup_distance < opt.total_budget) || !(f.sup_distance < 2.0))
        throw ApproximantError("approximant drifted " + std::to_string(f.sup_distance) + " from the family");
    const std::string bad = approximant_pattern_violation(f, tol);
    if (!bad.empty()) throw ApproximantError("gap pattern not reached: " + bad);
    return f;
}

std::string approximant_pattern_violation(const ApproximantFamily& f, const Tolerances& tol) {
    const MatchingFamily& a = f.app;
    const int half = a.n2 / 2;
    std::ostringstream os;
    if (f.kind == ApproxKind::direct) {
        for (int j = 0; j < a.n2; ++j) {
            const auto ph = sorted_phases(a.at(j));
            for (double x : ph)
                if (std::abs(std::exp(kI * x) + 1.0) <= tol.resolvent) os << "-1 in the spectrum at node " << j;
            if (!os.str().empty()) return os.str();
        }
        return {};
    }
    if (f.kind == ApproxKind::gen) {
        const auto chk = check_matching(a);
        if (chk.trs > 1e-7) os << "TRS residual " << chk.trs << "; ";
        for (int c : {0, half}) {
            const CMat& u = a.at(c);
            if (kramers_defect(u) > tol.degeneracy) os << "unpaired eigenvalues at node " << c << "; ";
            // distinct pairs: collapse pairs and look at the remaining gaps
            const auto ph = sorted_phases(u);
            const auto groups = group_phases(ph, tol.degeneracy);
            for (const auto& g : groups)
                if (g.second != 2) os << "multiplicity " << g.second << " at node " << c << "; ";
        }
        for (int j = 1; j < half; ++j)
            if (min_phase_gap(a.at(j)) <= tol.degeneracy) os << "degenerate at interior node " << j << "; ";
        return os.str();
    }
    for (int j = 0; j < a.n2; ++j)
        if (min_phase_gap(a.at(j)) <= tol.degeneracy) os << "degenerate at node " << j << "; ";
    for (int j = 1; j < half; ++j) {
        const auto p = sorted_phases(a.at(j));
        const auto q = sorted_phases(a.at(a.neg(j)));
        double d = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) d = std::max(d, std::abs(angle_diff(p[i], q[i])));
        if (d > 1e-7) os << "spectrum not even at node " << j << " (" << d << "); ";
    }
    return os.str();
}

}  // namespace symfr
