#include <cmath>

#include "doctest.h"
#include "synthetic.hpp"
#include "symfr/errors.hpp"
#include "symfr/z2.hpp"

using namespace symfr;
using namespace testkit;

namespace {

ProjectorFamily qwz(double u, int n) { return projector_from_hamiltonian(builtin_doubled_qwz(u), KGrid::make(n, n)); }

double trs_defect(const MatchingFamily& a) { return check_matching(a).trs; }

}  // namespace

TEST_CASE("constant projector: alpha and beta are the identity") {
    auto p = builtin_trivial(2, 4, KGrid::make(8, 8));
    auto base = matching_family(p);
    const auto& a = base.alpha;
    for (int j = 0; j < a.n2; ++j) CHECK(op_norm(a.at(j) - CMat::Identity(2, 2)) < 1e-10);
    auto b = build_beta(a, true, 8);
    CHECK(b.index == 0);
    CHECK(b.approximant.kind == ApproxKind::direct);
    for (int j = 0; j < a.n2; ++j)
        for (double k1 : {-0.5, -0.2, 0.0, 0.3, 0.5}) CHECK(op_norm(b.beta.at(k1, j) - CMat::Identity(2, 2)) < 1e-10);
}

TEST_CASE("trivial rank 4 gives a symmetric periodic frame") {
    auto p = builtin_trivial(4, 8, KGrid::make(8, 8));
    auto f = construct_frame_2d(p, true);
    const auto r = frame_residuals(f.frame, p);
    CHECK(r.orthonormality < 1e-10);
    CHECK(r.range < 1e-6);
    CHECK(r.periodicity < 1e-6);
    CHECK(r.trs < 1e-6);
}

TEST_CASE("QWZ u = 3: symmetric frame on both beta routes") {
    auto p = qwz(3.0, 32);
    auto base = matching_family(p);
    const auto mc = check_matching(base.alpha);
    CHECK(mc.trs < 1e-10);
    CHECK(mc.kramers_zero < 1e-8);
    CHECK(mc.kramers_half < 1e-8);
    for (bool direct : {true, false}) {
        ApproxOptions o;
        o.allow_direct = direct;
        auto b = build_beta(base.alpha, true, p.grid().n1, o);
        CHECK(b.approximant.kind == (direct ? ApproxKind::direct : ApproxKind::gen));
        const auto bc = check_beta(b.beta);
        CHECK(bc.defect < 1e-10);
        CHECK(bc.trs < 1e-10);
        const auto r = frame_residuals(assemble_frame_2d(base, b.beta), p);
        CHECK(r.orthonormality < 1e-6);
        CHECK(r.range < 1e-6);
        CHECK(r.periodicity < 1e-6);
        CHECK(r.trs < 1e-6);
    }
}

TEST_CASE("QWZ u = 1: symmetric frame obstructed, plain frame exists") {
    auto p = qwz(1.0, 64);
    auto base = matching_family(p);
    try {
        build_beta(base.alpha, true, p.grid().n1);
        FAIL("expected an obstruction");
    } catch (const ObstructionError& e) {
        CHECK(e.index() == 1);
        CHECK(e.crossings() % 2 == 1);
        CHECK(e.exit_code() == 4);
    }
    auto b = build_beta(base.alpha, false, p.grid().n1);
    CHECK(b.approximant.kind == ApproxKind::gap);
    CHECK(approximant_pattern_violation(b.approximant).empty());
    const auto r = frame_residuals(assemble_frame_2d(base, b.beta), p);
    CHECK(r.orthonormality < 1e-6);
    CHECK(r.range < 1e-6);
    CHECK(r.periodicity < 1e-6);
}

TEST_CASE("factorization of synthetic families") {
    for (int m : {2, 4}) {
        for (int q : {0, 1, 2}) {
            auto g = random_gamma(m, q, 0.3);
            auto a = sample(g, 32);
            const auto f = factorize_family(a);
            CHECK(f.residual < 1e-10);
            const auto mc = check_matching(a);
            CHECK(mc.det_even < 1e-10);
            for (int j = 0; j < a.n2; ++j) {
                const CMat& gj = f.gamma[static_cast<std::size_t>(j)];
                const CMat& gm = f.gamma[static_cast<std::size_t>(a.neg(j))];
                CHECK(op_norm(a.eps.adjoint() * gm.transpose() * a.eps * gj - a.at(j)) < 1e-9);
            }
        }
    }
}

TEST_CASE("endpoint factor of a single symmetric unitary") {
    const CMat eps = canonical_J(4);
    for (int t = 0; t < 5; ++t) {
        const CMat g = random_unitary(4);
        const CMat a = eps.adjoint() * g.transpose() * eps * g;
        const CMat gam = endpoint_factor(a);
        CHECK(op_norm(eps.adjoint() * gam.transpose() * eps * gam - a) < 1e-9);
    }
}

TEST_CASE("smoothing approaches the family as nu shrinks") {
    auto a = sample(random_gamma(4, 1, 0.3), 64);
    double last = 1e300;
    for (double nu : {0.08, 0.04, 0.02, 0.01, 0.005}) {
        double d = 0.0;
        auto s = analytic_smooth(a, nu, &d);
        CHECK(d < last);
        CHECK(trs_defect(s) < 1e-10);
        last = d;
    }
}

TEST_CASE("split modes on the identity") {
    SUBCASE("kramers split keeps pairs, separates them") {
        auto a = constant_family(CMat::Identity(4, 4), canonical_J(4), 16);
        auto r = split_local(a, 0, SplitMode::kramers, 0.08, 0, 1e-3);
        CHECK(r.sup_distance <= 0.1);
        CHECK(kramers_defect(r.alpha.at(0)) < 1e-8);
        CHECK(min_phase_gap(r.alpha.at(0)) < 1e-8);
        // two distinct pairs
        const auto e = eig_unitary(r.alpha.at(0));
        double spread = 0.0;
        for (Eigen::Index i = 0; i < e.phases.size(); ++i)
            spread = std::max(spread, std::abs(angle_diff(e.phases(i), e.phases(0))));
        CHECK(spread > 1e-3);
    }
    SUBCASE("full split lifts every degeneracy at the center") {
        auto a = constant_family(CMat::Identity(4, 4), canonical_J(4), 16);
        auto r = split_local(a, 4, SplitMode::full, 0.08, 0, 1e-3);
        CHECK(r.sup_distance <= 0.1);
        CHECK(min_phase_gap(r.alpha.at(4)) > 1e-3);
        CHECK(op_norm(r.alpha.at(12) - CMat::Identity(4, 4)) < 1e-12);
    }
}

TEST_CASE("generic pattern reached from the identity") {
    for (int m : {2, 4, 6}) {
        auto a = constant_family(CMat::Identity(m, m), canonical_J(m), 32);
        ApproxOptions o;
        o.allow_direct = false;
        auto f = build_alpha_gen(a, o);
        CHECK(approximant_pattern_violation(f).empty());
        CHECK(f.sup_distance < o.total_budget);
        auto b = build_beta(a, true, 8, o);
        const auto bc = check_beta(b.beta);
        CHECK(bc.defect < 1e-10);
        CHECK(bc.trs < 1e-10);
    }
}

TEST_CASE("det beta has the same winding on every k1 slice") {
    auto a = sample(random_gamma(2, 0, 0.15), 64);
    auto b = build_beta(a, true, 16);
    std::vector<double> w;
    for (double k1 : {-0.5, -0.25, 0.0, 0.25, 0.5})
        w.push_back(det_winding([&](int j) { return b.beta.at(k1, j); }, a.n2));
    for (double x : w) {
        CHECK(std::abs(x - std::round(x)) < 1e-6);
        CHECK(std::lround(x) == std::lround(w.front()));
    }
}

TEST_CASE("homotopy between families of equal index") {
    auto a0 = sample(random_gamma(2, 1, 0.15), 64);
    auto a1 = sample(random_gamma(2, 1, 0.15), 64);
    auto h = homotopy_between(a0, a1, 5);
    CHECK(h.path.size() == 5);
    CHECK(h.endpoint_residual < 1e-8);
    for (const auto& fam : h.path) {
        const auto mc = check_matching(fam);
        CHECK(mc.trs < 1e-8);
        CHECK(mc.unitarity < 1e-8);
    }
    // neighbouring samples stay close
    for (std::size_t q = 0; q + 1 < h.path.size(); ++q)
        for (int j = 0; j < 64; ++j) CHECK(op_norm(h.path[q + 1].at(j) - h.path[q].at(j)) < 2.0);
}

TEST_CASE("homotopy between families of different index is obstructed") {
    auto a0 = sample(random_gamma(2, 0, 0.15), 64);
    auto a1 = sample(random_gamma(2, 1, 0.15), 64);
    CHECK_THROWS_AS(homotopy_between(a0, a1), ObstructionError);
}

TEST_CASE("property: synthetic families, index and frames") {
    for (int trial = 0; trial < 6; ++trial) {
        const int m = trial % 2 == 0 ? 2 : 4;
        const int q = trial % 3;
        auto a = sample(random_gamma(m, q, 0.15), 64);
        CAPTURE(trial);
        const auto gp = graf_porta_index(a);
        CHECK(gp.bit == q % 2);
        ApproxOptions o;
        o.allow_direct = false;
        if (q % 2 == 0) {
            auto b = build_beta(a, true, 8, o);
            CHECK(check_beta(b.beta).trs < 1e-10);
        } else {
            CHECK_THROWS_AS(build_beta(a, true, 8, o), ObstructionError);
        }
        auto g = build_beta(a, false, 8, o);
        CHECK(check_beta(g.beta).defect < 1e-10);
    }
}
