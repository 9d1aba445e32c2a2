#include "run_config.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "symfr/errors.hpp"

namespace symfr::cli {

namespace pt = boost::property_tree;

namespace {

bool parse_bool(const std::string& s, const std::string& key) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw SchemaError(key + ": '" + s + "' is not a boolean");
}

template <class T>
T get(const pt::ptree& tree, const std::string& key, T fallback) {
    try {
        return tree.get<T>(key, fallback);
    } catch (const pt::ptree_error& e) {
        throw SchemaError(key + ": " + e.what());
    }
}

std::vector<double> number_list(const std::string& text, const std::string& key) {
    std::istringstream is(text);
    std::vector<double> out;
    std::string tok;
    while (is >> tok) {
        std::size_t used = 0;
        try {
            out.push_back(std::stod(tok, &used));
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != tok.size()) throw SchemaError(key + ": '" + tok + "' is not a number");
    }
    return out;
}

}  // namespace

const std::vector<std::string>& tolerance_names() {
    static const std::vector<std::string> names{"unitary",   "herm",      "skew",       "unit_modulus", "resolvent",
                                                "transport", "degeneracy", "degree",     "integer"};
    return names;
}

bool set_tolerance(Tolerances& t, const std::string& name, double v) {
    double* slot = name == "unitary"        ? &t.unitary
                   : name == "herm"         ? &t.herm
                   : name == "skew"         ? &t.skew
                   : name == "unit_modulus" ? &t.unit_modulus
                   : name == "resolvent"    ? &t.resolvent
                   : name == "transport"    ? &t.transport
                   : name == "degeneracy"   ? &t.degeneracy
                   : name == "degree"       ? &t.degree
                   : name == "integer"      ? &t.integer
                                            : nullptr;
    if (!slot) return false;
    *slot = v;
    return true;
}

std::vector<double> value_range(double from, double to, double step) {
    if (!(step > 0.0)) throw SchemaError("sweep step must be positive");
    std::vector<double> out;
    const long n = static_cast<long>(std::floor((to - from) / step + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(from + static_cast<double>(i) * step);
    return out;
}

RunConfig load_config(const std::string& path) {
    pt::ptree tree;
    try {
        pt::read_ini(path, tree);
    } catch (const pt::ini_parser_error& e) {
        throw SchemaError(std::string("cannot parse config: ") + e.what());
    }
    static const std::vector<std::string> sections{"run",   "model", "grid",    "tolerances",
                                                   "frame", "sweep", "wannier", "homotopy"};
    for (const auto& [key, sec] : tree) {
        if (std::find(sections.begin(), sections.end(), key) == sections.end())
            throw SchemaError("unknown section [" + key + "]");
        (void)sec;
    }
    RunConfig c;
    c.command = get<std::string>(tree, "run.command", "");
    c.out = get<std::string>(tree, "run.out", c.out);
    c.seed = get<std::uint64_t>(tree, "run.seed", c.seed);

    c.model.builtin = get<std::string>(tree, "model.builtin", "");
    c.model.file = get<std::string>(tree, "model.file", "");
    c.model.u = get<double>(tree, "model.u", c.model.u);
    c.model.m = get<int>(tree, "model.m", c.model.m);
    c.model.N = get<int>(tree, "model.N", c.model.N);
    c.model.n_wind = get<int>(tree, "model.n_wind", c.model.n_wind);

    c.n1 = get<int>(tree, "grid.n1", c.n1);
    c.n2 = get<int>(tree, "grid.n2", c.n2);
    c.max_grid = get<int>(tree, "grid.max", c.max_grid);

    if (auto tol = tree.get_child_optional("tolerances"))
        for (const auto& [key, v] : *tol) {
            const auto val = number_list(v.data(), "tolerances." + key);
            if (val.size() != 1) throw SchemaError("tolerances." + key + " needs one number");
            if (key == "max_halvings") c.tol.max_halvings = static_cast<int>(val[0]);
            else if (!set_tolerance(c.tol, key, val[0])) throw SchemaError("unknown tolerance '" + key + "'");
        }

    c.want_trs = parse_bool(get<std::string>(tree, "frame.trs", "false"), "frame.trs");
    c.emit_frames = parse_bool(get<std::string>(tree, "frame.emit_frames", "false"), "frame.emit_frames");
    c.emit_curvature = parse_bool(get<std::string>(tree, "frame.emit_curvature", "false"), "frame.emit_curvature");

    c.sweep_parameter = get<std::string>(tree, "sweep.parameter", c.sweep_parameter);
    c.workers = get<int>(tree, "sweep.workers", c.workers);
    if (tree.get_optional<std::string>("sweep.values"))
        c.sweep_values = number_list(tree.get<std::string>("sweep.values"), "sweep.values");
    else if (tree.get_optional<std::string>("sweep.from"))
        c.sweep_values = value_range(get<double>(tree, "sweep.from", 0.0), get<double>(tree, "sweep.to", 0.0),
                                     get<double>(tree, "sweep.step", 1.0));

    c.wannier_radius = get<int>(tree, "wannier.radius", c.wannier_radius);
    c.homotopy_samples = get<int>(tree, "homotopy.samples", c.homotopy_samples);
    c.homotopy_target = get<std::string>(tree, "homotopy.target", c.homotopy_target);
    c.target_u = get<double>(tree, "homotopy.u", c.target_u);
    return c;
}

void validate(const RunConfig& c) {
    if (c.model.builtin.empty() == c.model.file.empty())
        throw SchemaError("exactly one model source: set either a builtin or a model file");
    if (c.n1 <= 0 || c.n2 <= 0 || c.n1 % 4 != 0 || c.n2 % 4 != 0)
        throw ShapeError("grid sizes must be positive multiples of 4");
    const Tolerances& t = c.tol;
    for (double x : {t.unitary, t.herm, t.skew, t.unit_modulus, t.resolvent, t.transport, t.degeneracy, t.degree,
                     t.integer})
        if (!(x > 0.0)) throw SchemaError("tolerances must be positive");
    if (c.workers < 1) throw SchemaError("workers must be at least 1");
    if (c.homotopy_samples < 2) throw SchemaError("homotopy needs at least two samples");
    if (c.homotopy_target != "u" && c.homotopy_target != "random")
        throw SchemaError("homotopy.target must be 'u' or 'random'");
    if (c.sweep_parameter != "u") throw SchemaError("only the parameter 'u' can be swept");
}

ProjectorFamily family_for(const RunConfig& c, double u, int n1, int n2) {
    const ModelSpec& m = c.model;
    if (!m.file.empty()) return projector_from_hamiltonian(load_model_file(m.file), KGrid::make(n1, n2));
    if (m.builtin == "doubled_qwz") return projector_from_hamiltonian(builtin_doubled_qwz(u), KGrid::make(n1, n2));
    if (m.builtin == "qwz_block") return builtin_qwz_block(u, KGrid::make(n1, n2));
    if (m.builtin == "trivial") return builtin_trivial(m.m, m.N, KGrid::make(n1, n2));
    if (m.builtin == "twist") return builtin_1d_twist(m.n_wind, n1);
    throw SchemaError("unknown builtin '" + m.builtin + "' (doubled_qwz, qwz_block, trivial, twist)");
}

ProjectorFamily family_for(const RunConfig& c) { return family_for(c, c.model.u, c.n1, c.n2); }

}  // namespace symfr::cli
