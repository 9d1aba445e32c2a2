#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "symfr/errors.hpp"
#include "symfr/frames1d.hpp"

using namespace symfr;
using namespace testkit;

namespace {

// TRS gauge beta(k) = e^{2 pi i q k} e^{iX(k)}, X(k) = Y(k) - eps^{-1} conj(Y(-k)) eps,
// Y a random hermitian trigonometric polynomial; beta(-k) = eps^{-1} conj(beta(k)) eps.
struct TrsGauge {
    int q;
    std::vector<CMat> c;  // Y(k) = sum_r c_r cos(2 pi r k) + c'_r sin(2 pi r k)
    std::vector<CMat> s;
    CMat eps;

    CMat y(double k) const {
        CMat out = CMat::Zero(eps.rows(), eps.cols());
        for (std::size_t r = 0; r < c.size(); ++r)
            out += c[r] * std::cos(kTwoPi * r * k) + s[r] * std::sin(kTwoPi * (r + 1) * k);
        return out;
    }
    CMat operator()(double k) const {
        const CMat x = y(k) - eps.adjoint() * y(-k).conjugate() * eps;
        return expi_hermitian(x) * std::exp(kI * (kTwoPi * q * k));
    }
};

TrsGauge random_gauge(int m, int q) {
    TrsGauge g{q, {}, {}, canonical_J(m)};
    for (int r = 0; r < 2; ++r) {
        g.c.push_back(0.3 * random_hermitian(m));
        g.s.push_back(0.3 * random_hermitian(m));
    }
    return g;
}

FrameField regauge(const FrameField& f, const TrsGauge& g) {
    FrameField out = f;
    for (int j = 0; j <= f.n1; ++j) out.at(j) = f.at(j) * g(static_cast<double>(j) / f.n1);
    return out;
}

}  // namespace

TEST_CASE("Kramers pair at a point") {
    auto p = builtin_1d_twist(1);
    const auto& th = p.theta();
    const CMat xi = symmetric_frame_at_point(p(0.0), th);
    CHECK(op_norm(xi.adjoint() * xi - CMat::Identity(2, 2)) < 1e-12);
    CHECK(std::abs(xi.col(0).dot(xi.col(1))) < 1e-14);
    // Xi = theta Xi <| eps
    CHECK((th.apply(xi) * th.eps - xi).norm() < 1e-10);
    // also at k = 1/2
    const CMat xh = symmetric_frame_at_point(p(0.5), th);
    CHECK((th.apply(xh) * th.eps - xh).norm() < 1e-10);
}

TEST_CASE("rank-4 symmetric frame") {
    auto p = builtin_trivial(4, 8, KGrid::make(8, 8));
    const auto& th = p.theta();
    const CMat xi = symmetric_frame_at_point(p(0.0, 0.0), th);
    CHECK(op_norm(xi.adjoint() * xi - CMat::Identity(4, 4)) < 1e-10);
    CHECK((th.apply(xi) * th.eps - xi).norm() < 1e-10);
    CHECK((p(0.0, 0.0) * xi - xi).norm() < 1e-10);
}

TEST_CASE("seed choice changes the frame only by a U(m) gauge") {
    auto p = projector_from_hamiltonian(builtin_doubled_qwz(1.0), KGrid::make(16, 16));
    const CMat p0 = p(0.5, 0.0);
    const CMat a = symmetric_frame_at_point(p0, p.theta());
    // a permuted copy of the problem picks different seed vectors
    CMat perm = CMat::Zero(4, 4);
    perm(0, 1) = perm(1, 0) = perm(2, 3) = perm(3, 2) = 1.0;
    TimeReversal t2 = make_time_reversal(perm * p.theta().theta_unitary * perm.transpose(), 2);
    const CMat b = perm.transpose() * symmetric_frame_at_point(perm * p0 * perm.transpose(), t2);
    CHECK(op_norm(a * a.adjoint() - b * b.adjoint()) < 1e-10);
}

TEST_CASE("non-invariant projector is rejected") {
    auto p = builtin_1d_twist(1);
    CHECK_THROWS_AS(symmetric_frame_at_point(p(0.2), p.theta()), NotTRInvariantError);
}

TEST_CASE("constant family: alpha = 1, constant frame, zero Berry data") {
    auto p = builtin_trivial(2, 4, KGrid::make(16, 4), 1);
    auto c = construct_frame_1d(p);
    CHECK(op_norm(c.hol.alpha - CMat::Identity(2, 2)) < 1e-14);
    for (int j = 0; j <= 16; ++j) CHECK((c.frame.at(j) - c.xi0).norm() < 1e-14);
    auto b = berry_connection_trace(c.frame);
    CHECK(std::abs(b.loop) < 1e-14);
    CHECK(wilson_loop_check(c.hol, b) < 1e-14);
    CHECK(mod2_gamma_identity_check(c.hol, b).pass);
}

TEST_CASE("twist family: symmetric periodic frame at 256 nodes") {
    for (int n : {0, 1, 2}) {
        auto p = builtin_1d_twist(n, 256);
        auto c = construct_frame_1d(p);
        auto r = frame_residuals(c.frame, p);
        CHECK(r.orthonormality < 1e-9);
        CHECK(r.range < 1e-7);
        CHECK(r.periodicity < 1e-7);
        CHECK(r.trs < 1e-7);
        CHECK(kramers_defect(c.hol.alpha) < 1e-7);
        // TRS at a point for the matching matrix
        const CMat& eps = p.theta().eps;
        CHECK(op_norm(eps * c.hol.alpha - c.hol.alpha.transpose() * eps) < 1e-8);
        // alpha = eps^{-1} gamma^t eps gamma
        CHECK(op_norm(eps.adjoint() * c.hol.gamma.transpose() * eps * c.hol.gamma - c.hol.alpha) < 1e-8);
        // det gamma = Pf(eps alpha)
        CHECK(std::abs(c.hol.gamma.determinant() - pfaffian(eps * c.hol.alpha, {.skew = 1e-8})) < 1e-7);
        if (n == 0) CHECK(op_norm(c.hol.alpha - CMat::Identity(2, 2)) < 1e-8);
    }
}

TEST_CASE("holonomy of the twist against its closed form") {
    // alpha = e^{-i phi} 1 with phi = 2 pi n * mean(sin^2 a), a = 0.06 + 0.02 cos 2 pi k
    auto p = builtin_1d_twist(1, 256);
    auto c = construct_frame_1d(p);
    double mean = 0.0;
    const int q = 4096;
    for (int j = 0; j < q; ++j) {
        const double a = 0.06 + 0.02 * std::cos(kTwoPi * j / q);
        mean += std::sin(a) * std::sin(a) / q;
    }
    const cplx expect = std::exp(-kI * (kTwoPi * mean));
    CHECK(std::abs(c.hol.alpha(0, 0) - expect) < 1e-7);
    CHECK(std::abs(c.hol.alpha(1, 1) - expect) < 1e-7);
    CHECK(std::abs(c.hol.alpha(0, 1)) < 1e-7);
}

TEST_CASE("Wilson loop identity and its second-order convergence") {
    double prev = 0.0;
    for (int n : {128, 256, 512}) {
        auto p = builtin_1d_twist(1, n);
        auto c = construct_frame_1d(p);
        auto b = berry_connection_trace(c.frame);
        const double r = wilson_loop_check(c.hol, b);
        if (n == 256) CHECK(r < 1e-5);
        if (prev > 0) CHECK(prev / r == doctest::Approx(4.0).epsilon(0.15));
        prev = r;
    }
}

TEST_CASE("Berry data: evenness and the half-loop relation for symmetric frames") {
    auto p = builtin_1d_twist(2, 256, 0.5, 0.2);
    auto c = construct_frame_1d(p);
    auto b = berry_connection_trace(c.frame);
    // the real part is the O(dk^2) defect of the central difference; it is odd
    for (int j = 1; j < 256; ++j) CHECK(std::abs(b.omega[j].imag() - b.omega[256 - j].imag()) < 1e-7);
    for (const auto& w : b.omega) CHECK(std::abs(w.real()) < 5e-3);
    CHECK(std::abs(b.loop - 2.0 * b.half) < 1e-6);
}

TEST_CASE("gauge with det winding 1 shifts the loop integral by 2 pi") {
    auto p = builtin_1d_twist(1, 256);
    auto c = construct_frame_1d(p);
    auto b0 = berry_connection_trace(c.frame);
    FrameField g = c.frame;
    for (int j = 0; j <= 256; ++j) {
        CMat beta = CMat::Identity(2, 2);
        beta(0, 0) = std::exp(kI * (kTwoPi * j / 256));
        g.at(j) = c.frame.at(j) * beta;
    }
    auto b1 = berry_connection_trace(g);
    CHECK(std::abs(b1.loop - b0.loop - kTwoPi) < 1e-3);
}

TEST_CASE("mod-2 identity between det gamma and the Berry loop") {
    for (int n : {1, 2, -1}) {
        auto p = builtin_1d_twist(n, 256, 0.4, 0.1);
        auto c = construct_frame_1d(p);
        auto b = berry_connection_trace(c.frame);
        auto chk = mod2_gamma_identity_check(c.hol, b, 1e-2);
        CHECK(chk.pass);
        // the same frame data also gives ~oint A = -tr h exactly, so lhs = -rhs
        CHECK(std::abs(chk.lhs + chk.rhs) < 1e-2);
        // with the opposite relative sign the identity fails for a visible twist
        CHECK(distance_to_even(chk.lhs - chk.rhs) > 0.1);
    }
    auto p = builtin_1d_twist(1, 256);
    auto c = construct_frame_1d(p);
    auto b = berry_connection_trace(c.frame);
    CHECK(mod2_gamma_identity_check(c.hol, b).pass);
}

TEST_CASE("property: TRS gauges have even degree and keep the mod-2 identity") {
    auto p = builtin_1d_twist(1, 256);
    auto c = construct_frame_1d(p);
    const CMat& eps = p.theta().eps;
    for (int trial = 0; trial < 6; ++trial) {
        const int q = trial % 3 - 1;
        auto g = random_gauge(2, q);
        // TRS of the gauge itself
        for (double k : {0.1, 0.37}) CHECK(op_norm(g(-k) - eps.adjoint() * g(k).conjugate() * eps) < 1e-10);
        std::vector<CMat> samples;
        for (int j = 0; j < 256; ++j) samples.push_back(g(j / 256.0));
        const int deg = unitary_family_degree(samples).degree;
        CHECK(deg % 2 == 0);
        CHECK(deg == 2 * q);
        auto f = regauge(c.frame, g);
        CHECK(frame_residuals(f, p).trs < 1e-7);
        auto b = berry_connection_trace(f);
        // the frame's loop integral moves by 2 pi deg; stays within mod 2
        auto chk = mod2_gamma_identity_check(c.hol, b, 2e-3);
        CHECK(chk.pass);
    }
}
