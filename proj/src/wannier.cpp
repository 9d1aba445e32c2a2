#include "symfr/wannier.hpp"

#include <cmath>
#include <sstream>

#include "symfr/errors.hpp"

namespace symfr {

namespace {

// one-dimensional inverse sum along an axis of the periodic sample array:
// out[r] = (1/n) sum_j e^{2 pi i j r / n} in[j], r in [0, n)
void inverse_sum(const std::vector<CMat>& in, std::vector<CMat>& out, int n, int count, int stride, int block,
                 Exec exec) {
    std::vector<cplx> tw(static_cast<std::size_t>(n));
    for (int q = 0; q < n; ++q) tw[static_cast<std::size_t>(q)] = std::exp(kI * (kTwoPi * q / n));
    const long total = static_cast<long>(count) * n;
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
    for (long t = 0; t < total; ++t) {
        const int line = static_cast<int>(t / n), r = static_cast<int>(t % n);
        // line = outer * stride + inner within a block of n * stride entries
        const int outer = line / stride, inner = line % stride;
        const std::size_t base = static_cast<std::size_t>(outer) * block + inner;
        CMat acc = CMat::Zero(in[base].rows(), in[base].cols());
        for (int j = 0; j < n; ++j)
            acc += tw[static_cast<std::size_t>((static_cast<long>(j) * r) % n)] * in[base + static_cast<std::size_t>(j) * stride];
        out[base + static_cast<std::size_t>(r) * stride] = acc / static_cast<double>(n);
    }
}

int wrap(int r, int n) { return ((r % n) + n) % n; }

}  // namespace

int WannierSet::cell_index(int r1, int r2) const {
    if (std::abs(r1) > radius || std::abs(r2) > (dim == 2 ? radius : 0)) return -1;
    const int side = 2 * radius + 1;
    return dim == 2 ? (r2 + radius) * side + (r1 + radius) : r1 + radius;
}

WannierSet synthesize(const FrameField& f, int radius, Exec exec) {
    if (f.xi.empty()) throw ShapeError("empty frame");
    if (radius < 0) throw ShapeError("negative window radius");
    const int n1 = f.n1, n2 = f.dim == 2 ? f.n2 : 1;
    if (4 * radius > n1 || (f.dim == 2 && 4 * radius > n2)) {
        std::ostringstream os;
        os << "window radius " << radius << " exceeds a quarter of the " << n1 << (f.dim == 2 ? "x" + std::to_string(n2) : "")
           << " grid";
        throw AliasingError(os.str());
    }
    // the closing samples must repeat the first ones
    double gap = 0.0;
    for (int j2 = 0; j2 < n2; ++j2) gap = std::max(gap, op_norm(f.at(n1, j2) - f.at(0, j2)));
    if (f.dim == 2)
        for (int j1 = 0; j1 <= n1; ++j1) gap = std::max(gap, op_norm(f.at(j1, f.n2) - f.at(j1, 0)));
    if (gap > 1e-6) throw ShapeError("frame is not periodic (edge mismatch " + std::to_string(gap) + ")");

    WannierSet out;
    out.dim = f.dim;
    out.radius = radius;
    out.n1 = n1;
    out.n2 = f.dim == 2 ? n2 : 0;
    out.N = static_cast<int>(f.at(0).rows());
    out.m = static_cast<int>(f.at(0).cols());
    out.trs_paired = f.is_trs;

    // full period, separable: first along k1 then along k2
    std::vector<CMat> a(static_cast<std::size_t>(n1) * n2), b(a.size());
    for (int j2 = 0; j2 < n2; ++j2)
        for (int j1 = 0; j1 < n1; ++j1) a[static_cast<std::size_t>(j2) * n1 + j1] = f.at(j1, j2);
    inverse_sum(a, b, n1, n2, 1, n1, exec);
    if (f.dim == 2) inverse_sum(b, a, n2, n1, n1, n1 * n2, exec);
    else a.swap(b);

    double worst = 0.0;
    for (int c = 0; c < out.m; ++c) {
        double s = 0.0;
        for (const auto& x : a) s += x.col(c).squaredNorm();
        worst = std::max(worst, std::abs(s - 1.0));
    }
    out.parseval = worst;

    const int r2max = f.dim == 2 ? radius : 0;
    for (int r2 = -r2max; r2 <= r2max; ++r2)
        for (int r1 = -radius; r1 <= radius; ++r1) out.cells.push_back({r1, r2});
    out.w.assign(static_cast<std::size_t>(out.m), std::vector<CVec>(out.cells.size()));
    out.window_weight = 1e300;
    for (int c = 0; c < out.m; ++c) {
        double s = 0.0;
        for (std::size_t q = 0; q < out.cells.size(); ++q) {
            const auto& cell = out.cells[q];
            const auto idx = static_cast<std::size_t>(wrap(cell.r2, n2)) * n1 + wrap(cell.r1, n1);
            out.w[static_cast<std::size_t>(c)][q] = a[idx].col(c);
            s += a[idx].col(c).squaredNorm();
        }
        out.window_weight = std::min(out.window_weight, s);
    }
    return out;
}

double translated_orthonormality(const WannierSet& w, int shift) {
    double worst = 0.0;
    const int s2 = w.dim == 2 ? shift : 0;
    for (int d2 = -s2; d2 <= s2; ++d2)
        for (int d1 = -shift; d1 <= shift; ++d1)
            for (int a = 0; a < w.m; ++a)
                for (int b = 0; b < w.m; ++b) {
                    cplx ip = 0.0;
                    for (std::size_t q = 0; q < w.cells.size(); ++q) {
                        const int k = w.cell_index(w.cells[q].r1 - d1, w.cells[q].r2 - d2);
                        if (k < 0) continue;
                        ip += w.w[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)].dot(
                            w.w[static_cast<std::size_t>(b)][q]);
                    }
                    const double target = (a == b && d1 == 0 && d2 == 0) ? 1.0 : 0.0;
                    worst = std::max(worst, std::abs(ip - target));
                }
    return worst;
}

std::vector<DecayFit> decay_fit(WannierSet& w) {
    if (w.radius < 6) throw ShapeError("decay fit needs a window radius of at least 6");
    w.decay.clear();
    for (int a = 0; a < w.m; ++a) {
        const auto& fa = w.w[static_cast<std::size_t>(a)];
        std::vector<double> shell(static_cast<std::size_t>(w.radius) + 1, 0.0);
        for (std::size_t q = 0; q < w.cells.size(); ++q) {
            const int s = std::max(std::abs(w.cells[q].r1), std::abs(w.cells[q].r2));
            shell[static_cast<std::size_t>(s)] = std::max(shell[static_cast<std::size_t>(s)], fa[q].norm());
        }
        // shells below roundoff of the home cell carry no decay information
        const double cutoff = 1e-13 * std::max(shell[0], 1e-300);
        std::vector<double> xs, ys;
        DecayFit fit;
        fit.floor = 1e300;
        for (int s = 2; s <= w.radius - 1; ++s) {
            const double v = shell[static_cast<std::size_t>(s)];
            if (v <= cutoff) continue;
            xs.push_back(s);
            ys.push_back(std::log(v));
            fit.floor = std::min(fit.floor, v);
        }
        fit.shells = static_cast<int>(xs.size());
        if (xs.size() < 2) {
            // the tail is at roundoff: infinitely fast decay
            fit.slope = -std::numeric_limits<double>::infinity();
            fit.floor = xs.empty() ? 0.0 : fit.floor;
            w.decay.push_back(fit);
            continue;
        }
        const double n = static_cast<double>(xs.size());
        double mx = 0.0, my = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            mx += xs[i] / n;
            my += ys[i] / n;
        }
        double sxx = 0.0, sxy = 0.0, syy = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxx += (xs[i] - mx) * (xs[i] - mx);
            sxy += (xs[i] - mx) * (ys[i] - my);
            syy += (ys[i] - my) * (ys[i] - my);
        }
        fit.slope = sxy / sxx;
        fit.intercept = my - fit.slope * mx;
        double sse = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double e = ys[i] - fit.intercept - fit.slope * xs[i];
            sse += e * e;
        }
        fit.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
        fit.stderr_slope = xs.size() > 2 ? std::sqrt(sse / (n - 2.0) / sxx) : 0.0;
        w.decay.push_back(fit);
        if (!(fit.slope < -2.0 * fit.stderr_slope) || !(fit.slope < 0.0)) {
            std::ostringstream os;
            os << "Wannier function " << a << " does not decay: slope " << fit.slope << " +- " << fit.stderr_slope;
            throw LocalizationFailure(os.str());
        }
    }
    return w.decay;
}

double trs_pairing_check(const WannierSet& w, const TimeReversal& theta) {
    if (w.m % 2 != 0) throw ShapeError("odd number of Wannier functions cannot be Kramers paired");
    const CMat& eps = theta.eps;
    RVec sq = RVec::Zero(w.m);
    for (std::size_t q = 0; q < w.cells.size(); ++q) {
        CMat x(w.N, w.m);
        for (int a = 0; a < w.m; ++a) x.col(a) = w.w[static_cast<std::size_t>(a)][q];
        sq += (theta.apply(x) * eps - x).colwise().squaredNorm().transpose();
    }
    return std::sqrt(sq.maxCoeff());
}

}  // namespace symfr
