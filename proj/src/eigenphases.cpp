#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "symfr/errors.hpp"
#include "symfr/frames2d.hpp"

namespace symfr {

namespace {

std::vector<double> raw_phases(const CMat& u) {
    const auto e = eig_unitary(u);
    return {e.phases.data(), e.phases.data() + e.phases.size()};
}

// Permutation sigma minimizing sum_i |prev_i - next_sigma(i)| on the circle.
// Exhaustive for small m, greedy on sorted pair costs above that.
std::vector<int> best_assignment(const RVec& prev, const std::vector<double>& next) {
    const int m = static_cast<int>(next.size());
    std::vector<std::vector<double>> cost(m, std::vector<double>(m));
    for (int i = 0; i < m; ++i)
        for (int t = 0; t < m; ++t) cost[i][t] = std::abs(angle_diff(next[t], prev(i)));
    std::vector<int> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    if (m <= 8) {
        std::vector<int> best = perm;
        double best_cost = 1e300;
        do {
            double c = 0.0;
            for (int i = 0; i < m && c < best_cost; ++i) c += cost[i][perm[i]];
            if (c < best_cost - 1e-15) {
                best_cost = c;
                best = perm;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        return best;
    }
    std::vector<std::tuple<double, int, int>> pairs;
    for (int i = 0; i < m; ++i)
        for (int t = 0; t < m; ++t) pairs.emplace_back(cost[i][t], i, t);
    std::sort(pairs.begin(), pairs.end());
    std::vector<int> out(m, -1);
    std::vector<bool> used(m, false);
    for (const auto& [c, i, t] : pairs) {
        if (out[i] >= 0 || used[t]) continue;
        out[i] = t;
        used[t] = true;
    }
    return out;
}

constexpr double kMaxStep = kPi / 4;

struct Stepper {
    const MatchingFamily& a;
    int refined = 0;

    RVec advance(const RVec& prev, const std::vector<double>& next, double& jump) const {
        const auto sigma = best_assignment(prev, next);
        RVec out(prev.size());
        jump = 0.0;
        for (Eigen::Index i = 0; i < prev.size(); ++i) {
            const double d = angle_diff(next[sigma[i]], prev(i));
            out(i) = prev(i) + d;
            jump = std::max(jump, std::abs(d));
        }
        return out;
    }

    RVec step(const RVec& prev, double k0, double k1, const std::vector<double>& next, int depth) {
        double jump = 0.0;
        RVec out = advance(prev, next, jump);
        if (jump <= kMaxStep) return out;
        if (!a.eval || depth >= 2) {
            std::ostringstream os;
            os << "eigenphase step of " << jump << " rad near k2 = " << k0 << " cannot be resolved";
            throw TrackingError(os.str());
        }
        ++refined;
        RVec cur = prev;
        for (int q = 1; q <= 4; ++q) {
            const double ka = k0 + (k1 - k0) * (q - 1) / 4.0;
            const double kb = k0 + (k1 - k0) * q / 4.0;
            const auto ph = q == 4 ? next : raw_phases(a.eval(kb));
            cur = step(cur, ka, kb, ph, depth + 1);
        }
        return cur;
    }
};

}  // namespace

EigenCurves track_eigenphases(const MatchingFamily& a, double lo, const Tolerances&) {
    if (a.n2 % 4 != 0) throw ShapeError("k2 grid must be divisible by 4");
    EigenCurves c;
    c.n2 = a.n2;
    const int half = a.n2 / 2;
    auto ph0 = raw_phases(a.at(0));
    for (auto& x : ph0) x = wrap_angle(x, lo);
    std::sort(ph0.begin(), ph0.end());
    c.phase.emplace_back(Eigen::Map<RVec>(ph0.data(), static_cast<Eigen::Index>(ph0.size())));
    Stepper st{a};
    for (int j = 0; j < half; ++j) {
        const auto next = raw_phases(a.at(j + 1));
        c.phase.push_back(st.step(c.phase.back(), a.k2(j), a.k2(j + 1), next, 0));
    }
    c.refined_steps = st.refined;
    return c;
}

EigenCurves track_eigenphases(const MatchingFamily& a, const Tolerances& tol) {
    return track_eigenphases(a, wrap_angle(largest_gap_midpoint(a.at(0)), -kPi), tol);
}

CrossingCount count_crossings(const EigenCurves& c, const std::vector<double>& probe, const Tolerances& tol) {
    if (static_cast<int>(probe.size()) != c.nodes()) throw ShapeError("probe must have one value per curve node");
    CrossingCount out;
    out.clearance = 1e300;
    const Eigen::Index m = c.phase.front().size();
    for (int j = 0; j < c.nodes(); ++j)
        for (Eigen::Index i = 0; i < m; ++i) {
            const double d = probe[j] - c.phase[j](i);
            out.clearance = std::min(out.clearance, std::abs(d - kTwoPi * std::round(d / kTwoPi)));
        }
    if (out.clearance <= tol.resolvent) {
        std::ostringstream os;
        os << "probe touches an eigenphase curve (clearance " << out.clearance << ")";
        throw TangencyError(os.str());
    }
    for (int j = 0; j + 1 < c.nodes(); ++j)
        for (Eigen::Index i = 0; i < m; ++i) {
            const double d0 = probe[j] - c.phase[j](i);
            const double d1 = probe[j + 1] - c.phase[j + 1](i);
            if (std::abs(d1 - d0) >= kPi) throw TrackingError("probe moves too fast relative to the curves");
            out.count += static_cast<int>(std::abs(std::floor(d1 / kTwoPi) - std::floor(d0 / kTwoPi)));
        }
    return out;
}

double min_phase_gap(const CMat& u) {
    auto ph = raw_phases(u);
    std::sort(ph.begin(), ph.end());
    if (ph.size() < 2) return kTwoPi;
    double g = ph.front() + kTwoPi - ph.back();
    for (std::size_t i = 0; i + 1 < ph.size(); ++i) g = std::min(g, ph[i + 1] - ph[i]);
    return g;
}

}  // namespace symfr
