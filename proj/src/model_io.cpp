#include <cmath>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "symfr/errors.hpp"
#include "symfr/models.hpp"

namespace symfr {

namespace {

namespace pt = boost::property_tree;

std::vector<double> numbers(const std::string& text, const std::string& where) {
    std::istringstream is(text);
    std::vector<double> out;
    std::string tok;
    while (is >> tok) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw SchemaError(where + ": '" + tok + "' is not a number");
        }
    }
    return out;
}

CMat read_matrix(const pt::ptree& sec, int n, const std::string& where) {
    auto re = numbers(sec.get<std::string>("re", ""), where + ".re");
    auto im = numbers(sec.get<std::string>("im", ""), where + ".im");
    const std::size_t want = static_cast<std::size_t>(n) * n;
    if (re.empty() && im.empty()) throw SchemaError(where + ": needs 're' and/or 'im'");
    if (re.empty()) re.assign(want, 0.0);
    if (im.empty()) im.assign(want, 0.0);
    if (re.size() != want || im.size() != want) {
        std::ostringstream os;
        os << where << ": expected " << want << " entries (row-major), got re=" << re.size() << " im=" << im.size();
        throw SchemaError(os.str());
    }
    CMat m(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) m(r, c) = cplx(re[r * n + c], im[r * n + c]);
    return m;
}

struct Term {
    std::vector<int> harmonics;
    CMat coef;
};

}  // namespace

BlochHamiltonian load_model_file(const std::string& path) {
    pt::ptree tree;
    try {
        pt::read_ini(path, tree);
    } catch (const pt::ini_parser_error& e) {
        throw SchemaError(std::string("cannot parse model file: ") + e.what());
    }
    auto model = tree.get_child_optional("model");
    if (!model) throw SchemaError("missing [model] section");

    BlochHamiltonian h;
    int n = 0;
    try {
        h.name = model->get<std::string>("name", "imported");
        n = model->get<int>("N");
        h.dim = model->get<int>("d");
        h.e_low = model->get<double>("gap_low");
        h.e_high = model->get<double>("gap_high");
    } catch (const pt::ptree_error& e) {
        throw SchemaError(std::string("[model]: ") + e.what());
    }
    if (n <= 0 || n % 2 != 0) throw SchemaError("[model] N must be a positive even integer");
    if (h.dim != 1 && h.dim != 2) throw SchemaError("[model] d must be 1 or 2");
    if (!(h.e_low < h.e_high)) throw SchemaError("[model] gap_low must be below gap_high");
    h.N = n;

    auto theta = tree.get_child_optional("theta");
    if (!theta) throw SchemaError("missing [theta] section");
    h.theta.theta_unitary = read_matrix(*theta, n, "[theta]");
    if (unitarity_defect(h.theta.theta_unitary) > 1e-10) throw SchemaError("[theta] matrix is not unitary");

    std::vector<Term> terms;
    for (const auto& [key, sec] : tree) {
        if (key.rfind("term", 0) != 0) continue;
        Term t;
        for (double x : numbers(sec.get<std::string>("n", ""), "[" + key + "].n")) {
            if (x != std::floor(x)) throw SchemaError("[" + key + "].n must hold integers");
            t.harmonics.push_back(static_cast<int>(x));
        }
        if (static_cast<int>(t.harmonics.size()) != h.dim)
            throw SchemaError("[" + key + "].n must list " + std::to_string(h.dim) + " harmonics");
        t.coef = read_matrix(sec, n, "[" + key + "]");
        terms.push_back(std::move(t));
    }
    if (terms.empty()) throw SchemaError("no [term.*] sections");

    const int d = h.dim;
    h.H = [terms, n, d](double k1, double k2) {
        CMat out = CMat::Zero(n, n);
        for (const auto& t : terms) {
            double ph = t.harmonics[0] * k1;
            if (d == 2) ph += t.harmonics[1] * k2;
            out += t.coef * std::exp(kI * (kTwoPi * ph));
        }
        return out;
    };
    // hermiticity is a property of the whole sum; probe a few generic points
    for (double k : {0.0, 0.137, 0.5, 0.731}) {
        const CMat x = h.H(k, 0.3 * k + 0.11);
        if (hermiticity_defect(x) > 1e-10) throw SchemaError("H(k) is not self-adjoint; add the conjugate terms");
    }
    return h;
}

}  // namespace symfr
