#pragma once
// Matching families with a known index: alpha(k) = eps^{-1} gamma(-k)^t eps gamma(k)
// for gamma(k) = diag(e^{2 pi i q k}, 1, ...) e^{iY(k)}, Y a random hermitian
// trigonometric polynomial. The index is q mod 2.

#include <cmath>

#include "helpers.hpp"
#include "symfr/frames2d.hpp"

namespace testkit {

struct SyntheticGamma {
    int q = 0;
    std::vector<CMat> c, s;
    CMat eps;

    CMat operator()(double k) const {
        const auto m = eps.rows();
        CMat y = CMat::Zero(m, m);
        for (std::size_t r = 0; r < c.size(); ++r) {
            const double w = symfr::kTwoPi * static_cast<double>(r + 1) * k;
            y += c[r] * std::cos(w) + s[r] * std::sin(w);
        }
        CMat d = CMat::Identity(m, m);
        d(0, 0) = std::exp(symfr::kI * (symfr::kTwoPi * q * k));
        return d * symfr::expi_hermitian(y);
    }
    CMat alpha(double k) const { return eps.adjoint() * (*this)(-k).transpose() * eps * (*this)(k); }
};

inline SyntheticGamma random_gamma(int m, int q, double amp) {
    SyntheticGamma g{q, {}, {}, symfr::canonical_J(m)};
    for (int r = 0; r < 2; ++r) {
        g.c.push_back(amp * random_hermitian(m));
        g.s.push_back(amp * random_hermitian(m));
    }
    return g;
}

inline symfr::MatchingFamily sample(const SyntheticGamma& g, int n2) {
    symfr::MatchingFamily a;
    a.n2 = n2;
    a.eps = g.eps;
    for (int j = 0; j < n2; ++j) a.alpha.push_back(g.alpha(static_cast<double>(j) / n2));
    a.eval = [g](double k) { return g.alpha(k); };
    return a;
}

// unrounded winding of det f(j) over a closed loop of nodes
template <class F>
double det_winding(F&& f, int n) {
    double total = 0.0;
    cplx prev = f(0).determinant();
    for (int j = 1; j <= n; ++j) {
        const cplx cur = f(j % n).determinant();
        total += std::arg(cur / prev);
        prev = cur;
    }
    return total / symfr::kTwoPi;
}

}  // namespace testkit
