#pragma once
// Run configuration: an INI file (sections [run] [model] [grid] [tolerances]
// [frame] [sweep] [wannier] [homotopy]) overlaid by command-line flags.

#include <cstdint>
#include <string>
#include <vector>

#include "symfr/models.hpp"
#include "symfr/tolerances.hpp"

namespace symfr::cli {

struct ModelSpec {
    std::string builtin;  // doubled_qwz | qwz_block | trivial | twist
    std::string file;     // model import path; exclusive with builtin
    double u = 1.0;
    int m = 2;
    int N = 4;
    int n_wind = 1;
};

struct RunConfig {
    std::string command;
    ModelSpec model;
    int n1 = 64;
    int n2 = 64;
    Tolerances tol{};
    std::string out = "symfr-out";
    std::uint64_t seed = 0;
    bool want_trs = false;
    bool emit_frames = false;
    bool emit_curvature = false;
    int max_grid = 512;

    std::string sweep_parameter = "u";
    std::vector<double> sweep_values;
    int workers = 1;

    int wannier_radius = 8;

    int homotopy_samples = 9;
    std::string homotopy_target = "u";  // "u": same model at target_u; "random": seeded symmetric regauge
    double target_u = 3.0;
};

RunConfig load_config(const std::string& path);
// from <= to inclusive, step > 0; empty when from > to
std::vector<double> value_range(double from, double to, double step);
// grid sizes divisible by 4, positive tolerances, exactly one model source
void validate(const RunConfig& c);
// tolerance name -> field; false if unknown
bool set_tolerance(Tolerances& t, const std::string& name, double value);
const std::vector<std::string>& tolerance_names();

ProjectorFamily family_for(const RunConfig& c);
ProjectorFamily family_for(const RunConfig& c, double u, int n1, int n2);

}  // namespace symfr::cli
