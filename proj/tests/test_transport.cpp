#include <cmath>

#include "doctest.h"
#include "symfr/errors.hpp"
#include "symfr/transport.hpp"

using namespace symfr;

namespace {

ProjectorFamily qwz(double u, int n = 64) {
    return projector_from_hamiltonian(builtin_doubled_qwz(u), KGrid::make(n, n));
}

// rank-1 family P = |v><v| with v = (cos a, sin a e^{2 pi i k}), a = 0.4 + 0.2 sin 2 pi k
CVec v_of(double k) {
    const double a = 0.4 + 0.2 * std::sin(kTwoPi * k);
    CVec v(2);
    v << std::cos(a), std::sin(a) * std::exp(kI * (kTwoPi * k));
    return v;
}

CVec dv_of(double k) {
    const double a = 0.4 + 0.2 * std::sin(kTwoPi * k);
    const double da = 0.2 * kTwoPi * std::cos(kTwoPi * k);
    const cplx e = std::exp(kI * (kTwoPi * k));
    CVec d(2);
    d << -std::sin(a) * da, std::cos(a) * da * e + std::sin(a) * kI * kTwoPi * e;
    return d;
}

}  // namespace

TEST_CASE("generator of a constant family vanishes") {
    auto p = builtin_trivial(2, 4, KGrid::make(16, 16));
    CHECK(op_norm(transport_generator(p, 0.3, 0.2, 1.0 / 128)) == 0.0);
    auto line = transport_line(p, 0.25, 16, 0, 16);
    for (const auto& t : line.samples) CHECK(op_norm(t - CMat::Identity(4, 4)) == 0.0);
}

TEST_CASE("generator matches the closed-form derivative of a rank-1 family") {
    ProjectorFamily p("rank1", 1, 2, 1, TimeReversal{}, KGrid::make(64, 4), [](double k, double) {
        CVec v = v_of(k);
        return CMat(v * v.adjoint());
    });
    for (double k : {0.0, 0.13, 0.5, 0.77}) {
        const CVec v = v_of(k), dv = dv_of(k);
        const CMat pk = v * v.adjoint();
        const CMat dp = dv * v.adjoint() + v * dv.adjoint();
        const CMat exact = kI * (dp * pk - pk * dp);
        CHECK(op_norm(transport_generator(p, k, 0.0, 1.0 / 1024) - exact) < 1e-4);
        // error shrinks by ~4 when the step halves
        const double e1 = op_norm(transport_generator(p, k, 0.0, 1.0 / 256) - exact);
        const double e2 = op_norm(transport_generator(p, k, 0.0, 1.0 / 512) - exact);
        CHECK(e2 < 0.3 * e1);
    }
}

TEST_CASE("doubled QWZ generator is finite and self-adjoint") {
    auto p = qwz(1.0);
    const CMat a = transport_generator(p, 0.31, 0.27, 1.0 / 512);
    CHECK(hermiticity_defect(a) < 1e-8);
    CHECK(std::isfinite(op_norm(a)));
    CHECK(op_norm(a) > 0.0);
}

TEST_CASE("transport line meets the intertwining tolerance") {
    auto p = qwz(1.0);
    auto line = transport_line(p, 0.23, 64, 0, 64);
    CHECK(line.residual < 1e-7);
    for (const auto& t : line.samples) CHECK(unitarity_defect(t) < 1e-10);
    // intertwining at an interior node, recomputed here
    const CMat& t = line.at(17);
    CHECK(op_norm(p(17.0 / 64, 0.23) - t * p(0.0, 0.23) * t.adjoint()) < 1e-7);
}

TEST_CASE("group property T(a,b) T(b,c) = T(a,c)") {
    auto p = qwz(1.0);
    auto line = transport_line(p, 0.1, 64, -32, 64);
    for (auto [a, b, c] : {std::tuple{40, 10, -20}, std::tuple{64, 32, 0}, std::tuple{-5, 7, 3}}) {
        CHECK(op_norm(line.between(a, b) * line.between(b, c) - line.between(a, c)) < 1e-9);
    }
    // free-standing version, off-lattice end points
    const CMat tab = parallel_transport(p, 0.1, 0.13, 0.61);
    const CMat tbc = parallel_transport(p, 0.1, -0.2, 0.13);
    const CMat tac = parallel_transport(p, 0.1, -0.2, 0.61);
    CHECK(op_norm(tab * tbc - tac) < 1e-9);
}

TEST_CASE("time reversal of transport: theta T theta^-1 = T at (-k_perp, -k1, -k1')") {
    auto p = qwz(1.0);
    const auto& th = p.theta();
    for (double kp : {0.0, 0.2, 0.5}) {
        auto plus = transport_line(p, kp, 64, -64, 64);
        auto minus = transport_line(p, -kp, 64, -64, 64);
        for (auto [a, b] : {std::pair{64, 0}, std::pair{20, -10}, std::pair{-33, 5}}) {
            const CMat lhs = th.conjugate_op(plus.between(a, b));
            CHECK(op_norm(lhs - minus.between(-a, -b)) < 1e-7);
        }
    }
}

TEST_CASE("periodicity of transport in k1 and k_perp") {
    auto p = qwz(3.0);
    auto line = transport_line(p, 0.3, 32, -32, 64);
    // T(k1 + 1, k1' + 1) = T(k1, k1')
    CHECK(op_norm(line.between(64, 32) - line.between(32, 0)) < 1e-7);
    CHECK(op_norm(line.between(40, 36) - line.between(8, 4)) < 1e-7);
    auto shifted = transport_line(p, 1.3, 32, 0, 64);
    CHECK(op_norm(shifted.at(64) - line.at(64)) < 1e-9);
}

TEST_CASE("serial and OpenMP line batches agree bit for bit") {
    auto p = qwz(-1.0, 32);
    std::vector<double> kps{0.0, 0.125, 0.25, 0.375, 0.5, 0.625};
    auto a = transport_lines(p, kps, 32, 0, 32, {}, Exec::serial);
    auto b = transport_lines(p, kps, 32, 0, 32, {}, Exec::parallel);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].halvings == b[i].halvings);
        CHECK(op_norm(a[i].at(32) - b[i].at(32)) == 0.0);
    }
}

TEST_CASE("non-convergence raises TransportAccuracyError") {
    auto p = qwz(1.0);
    TransportOptions opt;
    opt.tol = 1e-14;
    opt.max_halvings = 1;
    CHECK_THROWS_AS(transport_line(p, 0.2, 16, 0, 16, opt), TransportAccuracyError);
}

TEST_CASE("variation-of-constants identity for the k2 derivative") {
    auto triv = builtin_trivial(2, 4, KGrid::make(16, 16));
    CHECK(transport_k2_derivative_check(triv, 0.25, 64) == 0.0);
    auto p = qwz(1.0);
    const double r512 = transport_k2_derivative_check(p, 0.25, 512);
    CHECK(r512 < 1e-5);
    const double r256 = transport_k2_derivative_check(p, 0.25, 256);
    MESSAGE("VoC residuals 256: " << r256 << "  512: " << r512);
    CHECK(r256 / r512 > 3.0);  // second order
}
