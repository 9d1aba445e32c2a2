#pragma once
// Parallel transport along k1 lines: i d/dk1 T = A T, A = i[dP/dk1, P].

#include <vector>

#include "symfr/models.hpp"

namespace symfr {

struct TransportOptions {
    int base_steps = 64;         // steps per unit k1 before refinement
    double tol = 1e-7;           // accepted intertwining residual
    int max_halvings = 6;
};

enum class Exec { serial, parallel };

// A = i[dP, P] at k, derivative by central differences with step `fd_step`.
CMat transport_generator(const ProjectorFamily& p, double k1, double k2, double fd_step);

// T_{k_perp}(x, 0) sampled at the nodes x_j = j / n_nodes, j in [j_min, j_max].
// Integration runs outward from 0 on a uniform lattice of n_nodes * 2^r steps
// per unit; r grows until every node meets the intertwining tolerance.
class TransportLine {
public:
    double k_perp = 0.0;
    int n_nodes = 0;
    int j_min = 0;
    int j_max = 0;
    int halvings = 0;
    double residual = 0.0;  // max intertwining residual over the nodes
    std::vector<CMat> samples;

    const CMat& at(int j) const { return samples.at(static_cast<std::size_t>(j - j_min)); }
    // T(x_a, x_b) = T(x_a, 0) T(x_b, 0)^*
    CMat between(int ja, int jb) const { return at(ja) * at(jb).adjoint(); }
};

TransportLine transport_line(const ProjectorFamily& p, double k_perp, int n_nodes, int j_min, int j_max,
                             const TransportOptions& opt = {});

// Several lines at once; lines are independent, Exec::parallel spreads them
// over OpenMP threads, Exec::serial is the reference path.
std::vector<TransportLine> transport_lines(const ProjectorFamily& p, const std::vector<double>& k_perps,
                                           int n_nodes, int j_min, int j_max, const TransportOptions& opt = {},
                                           Exec exec = Exec::parallel);

// T_{k_perp}(to, from) for arbitrary reals.
CMat parallel_transport(const ProjectorFamily& p, double k_perp, double from, double to,
                        const TransportOptions& opt = {});

// Fixed-step integration without refinement; returns T(x_j, 0), j = 0..steps.
std::vector<CMat> transport_fixed(const ProjectorFamily& p, double k_perp, int steps);

// Variation-of-constants self test for d/dk2 T_{k2}(k1, 0); max residual over
// the k1 lattice of `steps` points.
double transport_k2_derivative_check(const ProjectorFamily& p, double k2, int steps);

}  // namespace symfr
