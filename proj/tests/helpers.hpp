#pragma once
// Shared fixtures for the test binaries: seeded random matrices.

#include <random>

#include <Eigen/QR>

#include "symfr/linalg.hpp"

namespace testkit {

using symfr::CMat;
using symfr::cplx;

inline std::mt19937_64& rng() {
    static std::mt19937_64 g(20240917);
    return g;
}

inline CMat gaussian(int r, int c) {
    std::normal_distribution<double> n(0.0, 1.0);
    CMat m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = cplx(n(rng()), n(rng()));
    return m;
}

inline CMat random_unitary(int n) {
    Eigen::HouseholderQR<CMat> qr(gaussian(n, n));
    return qr.householderQ() * CMat::Identity(n, n);
}

inline CMat random_hermitian(int n) {
    CMat g = gaussian(n, n);
    return 0.5 * (g + g.adjoint());
}

inline CMat random_skew(int n) {
    CMat g = gaussian(n, n);
    return g - g.transpose();
}

inline double uniform(double a, double b) {
    std::uniform_real_distribution<double> u(a, b);
    return u(rng());
}

}  // namespace testkit
