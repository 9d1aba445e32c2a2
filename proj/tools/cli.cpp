// symfr: frames, Z2 reports, sweeps, Wannier export and homotopies from the
// command line. Exit codes: 0 ok, 2 input, 3 consistency, 4 obstruction,
// 5 numerical.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "run_config.hpp"
#include "symfr/errors.hpp"
#include "symfr/export.hpp"

using namespace symfr;
using namespace symfr::cli;

namespace {

constexpr double kGreen = 1e-6;  // residual threshold behind the "pass" flags

std::string out_path(const RunConfig& c, const std::string& name) {
    std::filesystem::create_directories(c.out);
    return (std::filesystem::path(c.out) / name).string();
}

void write_csv(const RunConfig& c, const std::string& name, const std::function<void(std::ostream&)>& fn) {
    std::ofstream os(out_path(c, name), std::ios::binary);
    if (!os) throw SchemaError("cannot write " + name);
    fn(os);
}

// what every JSON report starts with
Json header(const RunConfig& c, const ProjectorFamily& p) {
    Json model = {{"name", p.name()}, {"dim", p.dim()}, {"N", p.N()}, {"m", p.m()}};
    if (!c.model.file.empty()) model["file"] = c.model.file;
    else model["builtin"] = c.model.builtin;
    if (c.model.builtin == "doubled_qwz" || c.model.builtin == "qwz_block") model["u"] = c.model.u;
    Json j;
    j["command"] = c.command;
    j["model"] = model;
    j["grid"] = {p.grid().n1, p.dim() == 2 ? p.grid().n2 : 0};
    j["seed"] = c.seed;
    j["tolerances"] = to_json(c.tol);
    return j;
}

Json error_json(const Error& e) {
    Json j = {{"kind", e.kind()}, {"message", e.what()}, {"exit_code", e.exit_code()}};
    if (const auto* o = dynamic_cast<const ObstructionError*>(&e)) {
        j["index"] = o->index();
        j["crossings"] = o->crossings();
    }
    return j;
}

// run fn; on a library error record it under "error" in `report`, write it, rethrow
template <class F>
void guarded(const std::string& path, Json& report, F&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        report["error"] = error_json(e);
        write_json(path, report);
        throw;
    }
    write_json(path, report);
}

void require_2d(const ProjectorFamily& p, const char* what) {
    if (p.dim() != 2) throw DimensionError(std::string(what) + " needs a two-dimensional model");
}

// ---- verify ------------------------------------------------------------------

int cmd_verify(const RunConfig& c) {
    const auto p = family_for(c);
    const auto r = verify_assumptions(p);
    Json j = header(c, p);
    j["assumptions"] = to_json(r);
    write_json(out_path(c, "verify.json"), j);
    std::cout << "assumptions " << (r.pass ? "hold" : "fail");
    for (const auto& f : r.failures) std::cout << "; " << f;
    std::cout << "\n";
    return r.pass ? 0 : static_cast<int>(ExitClass::input);
}

// ---- z2 ----------------------------------------------------------------------

int cmd_z2(const RunConfig& c) {
    const auto p = family_for(c);
    require_2d(p, "z2");
    Json j = header(c, p);
    Z2Options opt;
    opt.max_grid = c.max_grid;
    guarded(out_path(c, "z2.json"), j, [&] {
        const auto r = full_report(p, opt, c.tol);
        j["report"] = to_json(r);
        std::cout << "Z2 index " << r.index << " (graf-porta " << r.graf_porta.bit << ", trim " << r.trim.bit;
        if (r.has_geometric) std::cout << ", geometric " << r.geometric.bit;
        if (r.has_fmp) std::cout << ", fmp " << r.fmp.bit;
        if (r.has_prodan) std::cout << ", prodan " << r.prodan.bit;
        if (r.has_pfaffian) std::cout << ", pfaffian " << r.pfaffian.bit;
        if (r.has_crossing) std::cout << ", crossing " << r.crossing_bit;
        std::cout << ")\n";
        for (const auto& n : r.notes) std::cout << "note: " << n << "\n";
    });
    if (c.emit_curvature)
        write_csv(c, "curvature.csv", [&](std::ostream& os) { write_curvature_csv(os, berry_curvature(p)); });
    return 0;
}

// ---- sweep -------------------------------------------------------------------

struct SweepRow {
    double u = 0.0;
    std::string status = "ok";
    int grid = 0;
    int index = -1;
    double via_pairs = 0, via_gamma = 0, via_degree = 0, fmp_degree = 0, geometric = 0, chern = 0;
    int trim = -1;
    bool disagree = false;
};

bool retryable(const Error& e) {
    return dynamic_cast<const QuadratureError*>(&e) || dynamic_cast<const UnderResolvedError*>(&e) ||
           dynamic_cast<const TrackingError*>(&e) || dynamic_cast<const NonIntegerDegreeError*>(&e) ||
           dynamic_cast<const TransportAccuracyError*>(&e);
}

SweepRow sweep_row(const RunConfig& c, double u) {
    SweepRow row;
    row.u = u;
    for (int n = c.n1;; n *= 2) {
        row.grid = n;
        try {
            const auto p = family_for(c, u, n, n);
            require_2d(p, "sweep");
            const auto base = matching_family(p, {}, Exec::serial, c.tol);
            const auto gp = graf_porta_index(base.alpha, c.tol);
            const auto fmp = fmp_delta(base.alpha, c.tol);
            const auto trim = trim_endpoint_index(base.alpha, c.tol);
            const auto geo = fu_kane_geometric(p, {}, c.tol, c.max_grid);
            row.index = gp.bit;
            row.via_pairs = gp.via_pairs;
            row.via_gamma = gp.via_gamma;
            row.via_degree = gp.via_degree;
            row.fmp_degree = fmp.degree;
            row.geometric = geo.value;
            row.trim = trim.bit;
            row.chern = chern_link_variable(p);
            row.disagree = fmp.bit != gp.bit || trim.bit != gp.bit || geo.bit != gp.bit;
            row.status = row.disagree ? "disagree" : "ok";
            return row;
        } catch (const GapClosedError&) {
            row.status = "gap_closed";
            return row;
        } catch (const Error& e) {
            if (!retryable(e) || 2 * n > c.max_grid) {
                row.status = "failed:" + e.kind();
                return row;
            }
        }
    }
}

int cmd_sweep(const RunConfig& c) {
    std::vector<SweepRow> rows(c.sweep_values.size());
    const long n = static_cast<long>(rows.size());
#pragma omp parallel for schedule(dynamic) num_threads(c.workers)
    for (long i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = sweep_row(c, c.sweep_values[static_cast<std::size_t>(i)]);
    bool disagree = false;
    write_csv(c, "sweep.csv", [&](std::ostream& os) {
        os << "u,status,grid,index,via_pairs,via_gamma,via_degree,fmp_degree,geometric,trim,chern\n";
        for (const auto& r : rows) {
            os << fmt(r.u) << ',' << r.status << ',' << r.grid << ',';
            if (r.index < 0) {
                os << ",,,,,,,\n";
                continue;
            }
            os << r.index << ',' << fmt(r.via_pairs) << ',' << fmt(r.via_gamma) << ',' << fmt(r.via_degree) << ','
               << fmt(r.fmp_degree) << ',' << fmt(r.geometric) << ',' << r.trim << ',' << fmt(r.chern) << '\n';
            disagree = disagree || r.disagree;
        }
    });
    for (const auto& r : rows)
        std::cout << "u=" << fmt(r.u) << " " << r.status << (r.index >= 0 ? " index " + std::to_string(r.index) : "")
                  << "\n";
    return disagree ? static_cast<int>(ExitClass::consistency) : 0;
}

// ---- frame -------------------------------------------------------------------

bool green(const FrameResiduals& r, bool trs) {
    return r.orthonormality < kGreen && r.range < kGreen && r.periodicity < kGreen && (!trs || r.trs < kGreen);
}

int cmd_frame(const RunConfig& c) {
    const auto p = family_for(c);
    Json j = header(c, p);
    j["want_trs"] = c.want_trs;
    FrameField frame;
    guarded(out_path(c, "frame.json"), j, [&] {
        if (p.dim() == 1) {
            const auto f = construct_frame_1d(p, {}, c.tol);
            const auto res = frame_residuals(f.frame, p);
            const auto berry = berry_connection_trace(f.frame);
            j["residuals"] = to_json(res);
            j["holonomy"] = {{"kramers_defect", number(kramers_defect(f.hol.alpha))},
                             {"wilson_loop", number(wilson_loop_check(f.hol, berry))},
                             {"transport_residual", number(f.line.residual)}};
            j["pass"] = green(res, true);
            frame = f.frame;
        } else {
            const auto f = construct_frame_2d(p, c.want_trs, {}, {}, c.tol);
            const auto res = frame_residuals(f.frame, p);
            j["residuals"] = to_json(res);
            j["matching"] = to_json(check_matching(f.base.alpha));
            j["beta"] = to_json(check_beta(f.beta.beta));
            j["approximant"] = to_json(f.beta.approximant);
            j["cut_clearance"] = number(f.beta.cut.clearance);
            j["index"] = f.beta.index;
            j["pass"] = green(res, c.want_trs);
            frame = f.frame;
        }
        std::cout << "frame residuals: " << j["residuals"].dump() << "\n";
    });
    if (c.emit_frames) write_csv(c, "frame.csv", [&](std::ostream& os) { write_frame_csv(os, frame); });
    return j["pass"].get<bool>() ? 0 : static_cast<int>(ExitClass::numerical);
}

// ---- wannier -----------------------------------------------------------------

int cmd_wannier(const RunConfig& c) {
    const auto p = family_for(c);
    Json j = header(c, p);
    j["want_trs"] = c.want_trs;
    j["radius"] = c.wannier_radius;
    guarded(out_path(c, "wannier.json"), j, [&] {
        const FrameField frame =
            p.dim() == 1 ? construct_frame_1d(p, {}, c.tol).frame : construct_frame_2d(p, c.want_trs, {}, {}, c.tol).frame;
        auto w = synthesize(frame, c.wannier_radius);
        write_csv(c, "wannier.csv", [&](std::ostream& os) { write_wannier_csv(os, w); });
        j["parseval"] = number(w.parseval);
        j["window_weight"] = number(w.window_weight);
        j["orthonormality"] = number(translated_orthonormality(w, std::min(3, c.wannier_radius)));
        if (w.trs_paired) j["trs_pairing"] = number(trs_pairing_check(w, p.theta()));
        if (c.wannier_radius >= 6) {
            Json fits = Json::array();
            try {
                decay_fit(w);
            } catch (const LocalizationFailure&) {
                for (const auto& d : w.decay) fits.push_back(to_json(d));
                j["decay"] = fits;
                throw;
            }
            for (const auto& d : w.decay) fits.push_back(to_json(d));
            j["decay"] = fits;
        }
        std::cout << "wannier: parseval " << fmt(w.parseval) << ", orthonormality " << j["orthonormality"].dump()
                  << "\n";
    });
    return 0;
}

// ---- homotopy ----------------------------------------------------------------

MatchingFamily random_regauge(const MatchingFamily& a, std::uint64_t seed) {
    // alpha -> eps^{-1} g(-k)^t eps alpha g(k), g = e^{iY(k)} with Y periodic:
    // a symmetric family of the same index
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    const int m = a.m();
    auto herm = [&] {
        CMat x(m, m);
        for (int r = 0; r < m; ++r)
            for (int s = 0; s < m; ++s) x(r, s) = cplx(nd(rng), nd(rng));
        return CMat(0.15 * (x + x.adjoint()));
    };
    const CMat c1 = herm(), s1 = herm();
    auto g = [&](double k) { return expi_hermitian(c1 * std::cos(kTwoPi * k) + s1 * std::sin(kTwoPi * k)); };
    MatchingFamily out = a;
    out.eval = nullptr;
    for (int j = 0; j < a.n2; ++j) {
        const double k = a.k2(j);
        out.alpha[static_cast<std::size_t>(j)] = a.eps.adjoint() * g(-k).transpose() * a.eps * a.at(j) * g(k);
    }
    return out;
}

int cmd_homotopy(const RunConfig& c) {
    const auto p0 = family_for(c);
    require_2d(p0, "homotopy");
    Json j = header(c, p0);
    j["target"] = c.homotopy_target;
    if (c.homotopy_target == "u") j["target_u"] = c.target_u;
    j["samples"] = c.homotopy_samples;
    guarded(out_path(c, "homotopy.json"), j, [&] {
        const auto a0 = matching_family(p0, {}, Exec::parallel, c.tol).alpha;
        const auto a1 = c.homotopy_target == "random"
                            ? random_regauge(a0, c.seed)
                            : matching_family(family_for(c, c.target_u, c.n1, c.n2), {}, Exec::parallel, c.tol).alpha;
        const auto h = homotopy_between(a0, a1, c.homotopy_samples, {}, c.tol);
        Json samples = Json::array();
        double worst = 0.0;
        for (std::size_t q = 0; q < h.path.size(); ++q) {
            const auto mc = check_matching(h.path[q]);
            samples.push_back({{"s", number(h.s[q])}, {"checks", to_json(mc)}});
            worst = std::max({worst, mc.trs, mc.unitarity});
        }
        j["path"] = samples;
        j["endpoint_residual"] = number(h.endpoint_residual);
        j["approximant"] = to_json(h.beta.approximant);
        j["pass"] = worst < kGreen && h.endpoint_residual < kGreen;
        write_csv(c, "homotopy.csv", [&](std::ostream& os) {
            os << "s,j2,k2,curve,phase\n";
            for (std::size_t q = 0; q < h.path.size(); ++q)
                for (int jj = 0; jj < h.path[q].n2; ++jj) {
                    auto e = eig_unitary(h.path[q].at(jj));
                    std::vector<double> ph(e.phases.data(), e.phases.data() + e.phases.size());
                    std::sort(ph.begin(), ph.end());
                    for (std::size_t i = 0; i < ph.size(); ++i)
                        os << fmt(h.s[q]) << ',' << jj << ',' << fmt(h.path[q].k2(jj)) << ',' << i << ',' << fmt(ph[i])
                           << '\n';
                }
        });
        std::cout << "homotopy: " << h.path.size() << " samples, endpoint residual " << fmt(h.endpoint_residual)
                  << "\n";
    });
    return j["pass"].get<bool>() ? 0 : static_cast<int>(ExitClass::numerical);
}

// ---- options -----------------------------------------------------------------

struct Flags {
    std::string config, model, model_file, out, values;
    double u = 0, from = 0, to = 0, step = 1, target_u = 0;
    int grid = 0, m = 0, N = 0, n_wind = 0, workers = 0, radius = 0, samples = 0, max_grid = 0;
    std::uint64_t seed = 0;
    bool trs = false, emit_frames = false, emit_curvature = false, random_target = false;
    std::map<std::string, double> tol;
};

void add_options(CLI::App& app, Flags& f, std::map<std::string, CLI::Option*>& opts) {
    opts["config"] = app.add_option("--config", f.config, "INI run configuration")->check(CLI::ExistingFile);
    opts["model"] = app.add_option("--model", f.model, "builtin model: doubled_qwz, qwz_block, trivial, twist");
    opts["model_file"] = app.add_option("--model-file", f.model_file, "model import file");
    opts["u"] = app.add_option("--u", f.u, "mass parameter of the QWZ models");
    opts["m"] = app.add_option("--m", f.m, "rank of the trivial model");
    opts["N"] = app.add_option("--N", f.N, "fibre dimension of the trivial model");
    opts["n_wind"] = app.add_option("--n-wind", f.n_wind, "winding of the 1-d twist model");
    opts["grid"] = app.add_option("--grid", f.grid, "grid nodes per direction (multiple of 4)");
    opts["max_grid"] = app.add_option("--max-grid", f.max_grid, "largest grid for refinement retries");
    opts["out"] = app.add_option("--out", f.out, "output directory");
    opts["seed"] = app.add_option("--seed", f.seed, "seed for all randomness");
    opts["trs"] = app.add_flag("--trs", f.trs, "ask for a time-reversal symmetric frame");
    opts["emit_frames"] = app.add_flag("--emit-frames", f.emit_frames, "write frame.csv");
    opts["emit_curvature"] = app.add_flag("--emit-curvature", f.emit_curvature, "write curvature.csv");
    opts["values"] = app.add_option("--values", f.values, "sweep values, space separated");
    opts["from"] = app.add_option("--from", f.from, "sweep start");
    opts["to"] = app.add_option("--to", f.to, "sweep end (inclusive)");
    opts["step"] = app.add_option("--step", f.step, "sweep step");
    opts["workers"] = app.add_option("--workers", f.workers, "concurrent sweep rows");
    opts["radius"] = app.add_option("--radius", f.radius, "Wannier window radius in cells");
    opts["samples"] = app.add_option("--samples", f.samples, "homotopy path samples");
    opts["target_u"] = app.add_option("--target-u", f.target_u, "homotopy endpoint: same model at this u");
    opts["random_target"] = app.add_flag("--random-target", f.random_target, "homotopy endpoint: seeded symmetric regauge");
    for (const auto& name : tolerance_names()) {
        f.tol[name] = 0.0;
        opts["tol-" + name] = app.add_option("--tol-" + name, f.tol[name], "tolerance override");
    }
}

RunConfig assemble(const std::string& command, const Flags& f, const std::map<std::string, CLI::Option*>& o) {
    auto given = [&](const std::string& k) { return o.at(k)->count() > 0; };
    RunConfig c = given("config") ? load_config(f.config) : RunConfig{};
    if (!c.command.empty() && c.command != command)
        throw SchemaError("config is for '" + c.command + "', not '" + command + "'");
    c.command = command;
    if (given("model")) {
        c.model.builtin = f.model;
        c.model.file.clear();
    }
    if (given("model_file")) {
        c.model.file = f.model_file;
        if (!given("model")) c.model.builtin.clear();
    }
    if (given("u")) c.model.u = f.u;
    if (given("m")) c.model.m = f.m;
    if (given("N")) c.model.N = f.N;
    if (given("n_wind")) c.model.n_wind = f.n_wind;
    if (given("grid")) c.n1 = c.n2 = f.grid;
    if (given("max_grid")) c.max_grid = f.max_grid;
    if (given("out")) c.out = f.out;
    if (given("seed")) c.seed = f.seed;
    if (given("trs")) c.want_trs = true;
    if (given("emit_frames")) c.emit_frames = true;
    if (given("emit_curvature")) c.emit_curvature = true;
    if (given("values")) {
        std::istringstream is(f.values);
        c.sweep_values.clear();
        for (std::string tok; is >> tok;) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(tok, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != tok.size()) throw SchemaError("--values: '" + tok + "' is not a number");
            c.sweep_values.push_back(v);
        }
    } else if (given("from") || given("to")) {
        c.sweep_values = value_range(f.from, f.to, f.step);
    }
    if (given("workers")) c.workers = f.workers;
    if (given("radius")) c.wannier_radius = f.radius;
    if (given("samples")) c.homotopy_samples = f.samples;
    if (given("target_u")) {
        c.homotopy_target = "u";
        c.target_u = f.target_u;
    }
    if (given("random_target")) c.homotopy_target = "random";
    for (const auto& [name, v] : f.tol)
        if (given("tol-" + name)) set_tolerance(c.tol, name, v);
    validate(c);
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"symmetric Bloch frames and Z2 invariants"};
    app.require_subcommand(1);
    const std::vector<std::pair<std::string, std::string>> commands{
        {"verify", "check the projector family assumptions"},
        {"z2", "Z2 index by every available definition"},
        {"sweep", "index over a range of u"},
        {"frame", "construct a periodic (optionally symmetric) frame"},
        {"wannier", "Wannier functions of the constructed frame"},
        {"homotopy", "path between two matching families of equal index"}};
    Flags flags;
    std::map<std::string, std::map<std::string, CLI::Option*>> opts;
    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, help] : commands) {
        subs[name] = app.add_subcommand(name, help);
        add_options(*subs[name], flags, opts[name]);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return static_cast<int>(ExitClass::input);
    }
    try {
        for (const auto& [name, sub] : subs) {
            if (!sub->parsed()) continue;
            const RunConfig c = assemble(name, flags, opts[name]);
            if (name == "verify") return cmd_verify(c);
            if (name == "z2") return cmd_z2(c);
            if (name == "sweep") return cmd_sweep(c);
            if (name == "frame") return cmd_frame(c);
            if (name == "wannier") return cmd_wannier(c);
            if (name == "homotopy") return cmd_homotopy(c);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(ExitClass::numerical);
    }
    return static_cast<int>(ExitClass::input);
}
