#include "symfr/transport.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>

#include "symfr/errors.hpp"

namespace symfr {

CMat transport_generator(const ProjectorFamily& p, double k1, double k2, double fd_step) {
    const CMat dp = (p(k1 + fd_step, k2) - p(k1 - fd_step, k2)) / (2.0 * fd_step);
    const CMat pk = p(k1, k2);
    CMat a = kI * (dp * pk - pk * dp);
    return 0.5 * (a + a.adjoint());
}

namespace {

// one exponential-midpoint step from x to x + dx (dx may be negative)
CMat step(const ProjectorFamily& p, double k_perp, double x, double dx, double fd) {
    const CMat a = transport_generator(p, x + 0.5 * dx, k_perp, fd);
    return expi_hermitian(a, -dx);
}

// T(t, 0) for each target t, marching outward from 0 on the lattice h Z.
// Off-lattice targets are reached by a partial step that is not committed.
std::vector<CMat> march(const ProjectorFamily& p, double k_perp, double h, const std::vector<double>& targets) {
    const Eigen::Index n = p.N();
    const double fd = h / 8.0;
    std::vector<CMat> out(targets.size());
    for (int dir : {+1, -1}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < targets.size(); ++i)
            if ((dir > 0 && targets[i] >= 0) || (dir < 0 && targets[i] < 0)) idx.push_back(i);
        std::sort(idx.begin(), idx.end(),
                  [&](std::size_t a, std::size_t b) { return std::abs(targets[a]) < std::abs(targets[b]); });
        CMat t = CMat::Identity(n, n);
        long pos = 0;  // lattice index, x = dir * pos * h
        for (std::size_t i : idx) {
            const double goal = std::abs(targets[i]);
            const long full = static_cast<long>(std::floor(goal / h + 1e-9));
            for (; pos < full; ++pos) t = step(p, k_perp, dir * pos * h, dir * h, fd) * t;
            const double rest = goal - pos * h;
            if (rest > 1e-12 * h)
                out[i] = step(p, k_perp, dir * pos * h, dir * rest, fd) * t;
            else
                out[i] = t;
        }
    }
    return out;
}

double intertwining(const ProjectorFamily& p, double k_perp, double x, const CMat& t, const CMat& p0) {
    return op_norm(p(x, k_perp) - t * p0 * t.adjoint());
}

}  // namespace

TransportLine transport_line(const ProjectorFamily& p, double k_perp, int n_nodes, int j_min, int j_max,
                             const TransportOptions& opt) {
    if (n_nodes <= 0 || j_min > 0 || j_max < 0) throw ShapeError("transport line must contain k1 = 0");
    std::vector<double> xs;
    for (int j = j_min; j <= j_max; ++j) xs.push_back(static_cast<double>(j) / n_nodes);
    const CMat p0 = p(0.0, k_perp);

    // start from the coarser of the node spacing and the base step
    int per_node = std::max(1, (opt.base_steps + n_nodes - 1) / n_nodes);
    TransportLine line;
    line.k_perp = k_perp;
    line.n_nodes = n_nodes;
    line.j_min = j_min;
    line.j_max = j_max;
    for (int r = 0; r <= opt.max_halvings; ++r) {
        const double h = 1.0 / (static_cast<double>(n_nodes) * per_node);
        line.samples = march(p, k_perp, h, xs);
        double res = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i)
            res = std::max(res, intertwining(p, k_perp, xs[i], line.samples[i], p0));
        line.residual = res;
        line.halvings = r;
        if (res < opt.tol) return line;
        per_node *= 2;
    }
    std::ostringstream os;
    os << "transport at k_perp=" << k_perp << " stalled at residual " << line.residual << " after "
       << opt.max_halvings << " halvings";
    throw TransportAccuracyError(os.str());
}

std::vector<TransportLine> transport_lines(const ProjectorFamily& p, const std::vector<double>& k_perps,
                                           int n_nodes, int j_min, int j_max, const TransportOptions& opt,
                                           Exec exec) {
    std::vector<TransportLine> out(k_perps.size());
    if (exec == Exec::serial) {
        for (std::size_t i = 0; i < k_perps.size(); ++i)
            out[i] = transport_line(p, k_perps[i], n_nodes, j_min, j_max, opt);
        return out;
    }
    std::exception_ptr failure;
    const long n = static_cast<long>(k_perps.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        try {
            out[i] = transport_line(p, k_perps[i], n_nodes, j_min, j_max, opt);
        } catch (...) {
#pragma omp critical(symfr_transport_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

CMat parallel_transport(const ProjectorFamily& p, double k_perp, double from, double to,
                        const TransportOptions& opt) {
    // the refinement level depends on k_perp only, so that transports at the
    // same k_perp compose exactly
    const auto period = transport_line(p, k_perp, opt.base_steps, -opt.base_steps, opt.base_steps, opt);
    const double h = 1.0 / (static_cast<double>(opt.base_steps) * (1 << period.halvings));
    const auto t = march(p, k_perp, h, {from, to});
    return t[1] * t[0].adjoint();
}

std::vector<CMat> transport_fixed(const ProjectorFamily& p, double k_perp, int steps) {
    const double h = 1.0 / steps;
    std::vector<CMat> out;
    out.reserve(steps + 1);
    out.push_back(CMat::Identity(p.N(), p.N()));
    for (int j = 0; j < steps; ++j) out.push_back(step(p, k_perp, j * h, h, h / 8.0) * out.back());
    return out;
}

double transport_k2_derivative_check(const ProjectorFamily& p, double k2, int steps) {
    if (p.dim() != 2) throw DimensionError("k2 derivative check needs a 2-d family");
    const double h = 1.0 / steps;
    const double d2 = h / 8.0;  // k2 difference step
    const auto tm = transport_fixed(p, k2 - d2, steps);
    const auto tp = transport_fixed(p, k2 + d2, steps);
    const auto t0 = transport_fixed(p, k2, steps);

    // integrand T(s,0)^* dA/dk2 T(s,0); per step dA/dk2 is taken at the
    // midpoint and the conjugation is integrated by Simpson's rule along the
    // step propagator
    double worst = 0.0;
    CMat acc = CMat::Zero(p.N(), p.N());
    for (int j = 0; j < steps; ++j) {
        const double s = (j + 0.5) * h;
        const CMat da = (transport_generator(p, s, k2 + d2, h / 8.0) - transport_generator(p, s, k2 - d2, h / 8.0)) /
                        (2.0 * d2);
        const CMat a = transport_generator(p, s, k2, h / 8.0);
        const CMat half = expi_hermitian(a, -0.5 * h) * t0[j];
        const CMat full = expi_hermitian(a, -h) * t0[j];
        acc += (h / 6.0) * (t0[j].adjoint() * da * t0[j] + 4.0 * (half.adjoint() * da * half) +
                            full.adjoint() * da * full);
        const CMat lhs = (tp[j + 1] - tm[j + 1]) / (2.0 * d2);
        const CMat rhs = -kI * t0[j + 1] * acc;
        worst = std::max(worst, op_norm(lhs - rhs));
    }
    return worst;
}

}  // namespace symfr
