#pragma once
// Projector families k -> P(k) with fermionic time reversal, built-in
// tight-binding models and an assumption checker.

#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "symfr/linalg.hpp"

namespace symfr {

// Uniform grid on the torus, nodes k_i = j_i / n_i. Counts divisible by 4 so
// that 0, 1/2 and the four TRIMs are nodes.
struct KGrid {
    int n1 = 64;
    int n2 = 64;

    static KGrid make(int n1, int n2 = 4);
    double k1(int j) const { return static_cast<double>(j) / n1; }
    double k2(int j) const { return static_cast<double>(j) / n2; }
    int neg1(int j) const { return (n1 - j % n1) % n1; }
    int neg2(int j) const { return (n2 - j % n2) % n2; }
    int half1() const { return n1 / 2; }
    int half2() const { return n2 / 2; }
};

// theta = theta_unitary o complex conjugation, theta^2 = -1.
struct TimeReversal {
    CMat theta_unitary;
    CMat eps;  // canonical J of size m

    bool present() const { return theta_unitary.size() > 0; }
    // theta applied columnwise
    CMat apply(const CMat& x) const { return theta_unitary * x.conjugate(); }
    // theta A theta^{-1}
    CMat conjugate_op(const CMat& a) const {
        return theta_unitary * a.conjugate() * theta_unitary.adjoint();
    }
    double square_defect() const;
};

TimeReversal make_time_reversal(const CMat& theta_unitary, int m);

using KFunction = std::function<CMat(double, double)>;

struct BlochHamiltonian {
    std::string name;
    int dim = 2;
    int N = 0;
    KFunction H;
    double e_low = 0.0;  // occupied bands lie below e_low
    double e_high = 0.0; // nothing may sit in [e_low, e_high]
    TimeReversal theta;
};

class ProjectorFamily {
public:
    ProjectorFamily() = default;
    ProjectorFamily(std::string name, int dim, int N, int m, TimeReversal theta, KGrid grid, KFunction eval);

    const std::string& name() const { return name_; }
    int dim() const { return dim_; }
    int N() const { return N_; }
    int m() const { return m_; }
    const TimeReversal& theta() const { return theta_; }
    const KGrid& grid() const { return grid_; }

    CMat operator()(double k1, double k2 = 0.0) const { return eval_(k1, k2); }
    // grid node value, cached (computed once on first access)
    const CMat& node(int j1, int j2 = 0) const;

    ProjectorFamily with_grid(const KGrid& g) const;
    // 1-d family k -> P(k, k_perp)
    ProjectorFamily restrict_line(double k_perp) const;
    // 1-d family k -> P(k1, k), sampled on the k2 grid
    ProjectorFamily line_along_k2(double k1) const;

private:
    struct Cache {
        std::once_flag once;
        std::vector<CMat> data;
    };
    std::string name_;
    int dim_ = 2;
    int N_ = 0;
    int m_ = 0;
    TimeReversal theta_;
    KGrid grid_;
    KFunction eval_;
    std::shared_ptr<Cache> cache_;
};

ProjectorFamily projector_from_hamiltonian(const BlochHamiltonian& h, const KGrid& grid);

BlochHamiltonian builtin_doubled_qwz(double u);
// single 2x2 block, rank-1 projector, no time reversal (Chern diagnostics)
ProjectorFamily builtin_qwz_block(double u, const KGrid& grid);
ProjectorFamily builtin_trivial(int m, int N, const KGrid& grid, int dim = 2);
ProjectorFamily builtin_1d_twist(int n_wind, int n_nodes = 256, double a0 = 0.06, double c = 0.02);

struct AssumptionReport {
    double idempotency = 0.0;
    double self_adjointness = 0.0;
    double periodicity = 0.0;
    double trs = 0.0;
    double trs_square = 0.0;
    double rank = 0.0;
    int m = 0;
    bool rank_even = false;
    bool pass = false;
    std::vector<std::string> failures;
};

AssumptionReport verify_assumptions(const ProjectorFamily& p);

// Structured-text model import (see docs/formats.md).
BlochHamiltonian load_model_file(const std::string& path);

}  // namespace symfr
