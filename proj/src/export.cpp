#include "symfr/export.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "symfr/errors.hpp"

namespace symfr {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

Json number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

namespace {

Json complex_pair(cplx z) { return Json::array({number(z.real()), number(z.imag())}); }

}  // namespace

Json to_json(const Tolerances& t) {
    return {{"unitary", t.unitary},       {"herm", t.herm},
            {"skew", t.skew},             {"unit_modulus", t.unit_modulus},
            {"resolvent", t.resolvent},   {"transport", t.transport},
            {"degeneracy", t.degeneracy}, {"degree", t.degree},
            {"integer", t.integer},       {"max_halvings", t.max_halvings}};
}

Json to_json(const AssumptionReport& r) {
    return {{"idempotency", number(r.idempotency)},
            {"self_adjointness", number(r.self_adjointness)},
            {"periodicity", number(r.periodicity)},
            {"trs", number(r.trs)},
            {"trs_square", number(r.trs_square)},
            {"rank", number(r.rank)},
            {"m", r.m},
            {"rank_even", r.rank_even},
            {"pass", r.pass},
            {"failures", r.failures}};
}

Json to_json(const FrameResiduals& r) {
    return {{"orthonormality", number(r.orthonormality)},
            {"range", number(r.range)},
            {"periodicity", number(r.periodicity)},
            {"trs", number(r.trs)}};
}

Json to_json(const MatchingChecks& c) {
    return {{"jump", number(c.jump)},         {"trs", number(c.trs)},
            {"kramers_zero", number(c.kramers_zero)}, {"kramers_half", number(c.kramers_half)},
            {"unitarity", number(c.unitarity)}, {"det_even", number(c.det_even)}};
}

Json to_json(const BetaChecks& c) {
    return {{"continuity", number(c.continuity)},
            {"defect", number(c.defect)},
            {"trs", number(c.trs)},
            {"normalization", number(c.normalization)}};
}

Json to_json(const GrafPortaIndex& g) {
    return {{"bit", g.bit},
            {"via_pairs", number(g.via_pairs)},
            {"via_gamma", number(g.via_gamma)},
            {"via_degree", number(g.via_degree)},
            {"residual", number(g.residual)},
            {"factorization_residual", number(g.factors.residual)}};
}

Json to_json(const Z2Report& r) {
    Json j;
    j["model"] = r.model;
    j["grid"] = {r.n1, r.n2};
    j["index"] = r.index;
    j["graf_porta"] = to_json(r.graf_porta);
    j["trim"] = {{"bit", r.trim.bit}, {"ratio_zero", complex_pair(r.trim.ratio_zero)},
                 {"ratio_half", complex_pair(r.trim.ratio_half)}};
    j["chern"] = number(r.chern);
    if (r.has_geometric)
        j["geometric"] = {{"bit", r.geometric.bit},
                          {"value", number(r.geometric.value)},
                          {"printed_variant", number(r.geometric.printed_variant)},
                          {"flux_half", number(r.geometric.flux_half)},
                          {"loop_zero", number(r.geometric.loop_zero)},
                          {"loop_half", number(r.geometric.loop_half)},
                          {"grid", r.geometric.grid}};
    if (r.has_fmp)
        j["fmp"] = {{"bit", r.fmp.bit},
                    {"degree", number(r.fmp.degree)},
                    {"gamma_degree", number(r.fmp.gamma_degree)},
                    {"trs_residual", number(r.fmp.trs_residual)}};
    if (r.has_prodan)
        j["prodan"] = {{"bit", r.prodan.bit},
                       {"ratio_zero", complex_pair(r.prodan.ratio_zero)},
                       {"ratio_half", complex_pair(r.prodan.ratio_half)},
                       {"product", number(r.prodan.product)},
                       {"residual_left", number(r.prodan.residual_left)},
                       {"residual_right", number(r.prodan.residual_right)}};
    if (r.has_pfaffian) {
        Json pf = Json::array(), sq = Json::array();
        for (int i = 0; i < 4; ++i) {
            pf.push_back(complex_pair(r.pfaffian.pf[static_cast<std::size_t>(i)]));
            sq.push_back(complex_pair(r.pfaffian.sqrt_det[static_cast<std::size_t>(i)]));
        }
        j["pfaffian"] = {{"bit", r.pfaffian.bit},
                         {"pf", pf},
                         {"sqrt_det", sq},
                         {"product", number(r.pfaffian.product)},
                         {"skewness", number(r.pfaffian.skewness)},
                         {"loop_closure", number(r.pfaffian.loop_closure)}};
    }
    if (r.has_crossing) j["crossing"] = {{"bit", r.crossing_bit}};
    j["notes"] = r.notes;
    return j;
}

Json to_json(const DecayFit& d) {
    return {{"slope", number(d.slope)},         {"intercept", number(d.intercept)}, {"r2", number(d.r2)},
            {"stderr", number(d.stderr_slope)}, {"shells", d.shells},             {"floor", number(d.floor)}};
}

Json to_json(const ApproximantFamily& f) {
    return {{"kind", to_string(f.kind)}, {"sup_distance", number(f.sup_distance)}, {"stages", f.stages}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void write_json(const std::string& path, const Json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SchemaError("cannot write " + path);
    out << dump(j);
}

void write_frame_csv(std::ostream& os, const FrameField& f) {
    os << "j1,j2,k1,k2,row,col,re,im\n";
    const int n2 = f.dim == 2 ? f.n2 : 0;
    for (int j2 = 0; j2 <= n2; ++j2)
        for (int j1 = 0; j1 <= f.n1; ++j1) {
            const CMat& x = f.at(j1, j2);
            const double k1 = static_cast<double>(j1) / f.n1, k2 = n2 ? static_cast<double>(j2) / n2 : 0.0;
            for (Eigen::Index r = 0; r < x.rows(); ++r)
                for (Eigen::Index c = 0; c < x.cols(); ++c)
                    os << j1 << ',' << j2 << ',' << fmt(k1) << ',' << fmt(k2) << ',' << r << ',' << c << ','
                       << fmt(x(r, c).real()) << ',' << fmt(x(r, c).imag()) << '\n';
        }
}

void write_curvature_csv(std::ostream& os, const CurvatureGrid& c) {
    os << "j1,j2,k1,k2,F\n";
    for (int j2 = 0; j2 < c.n2; ++j2)
        for (int j1 = 0; j1 < c.n1; ++j1)
            os << j1 << ',' << j2 << ',' << fmt(static_cast<double>(j1) / c.n1) << ','
               << fmt(static_cast<double>(j2) / c.n2) << ',' << fmt(c.at(j1, j2)) << '\n';
}

void write_wannier_csv(std::ostream& os, const WannierSet& w) {
    os << "r1,r2,a,component,re,im\n";
    for (std::size_t q = 0; q < w.cells.size(); ++q)
        for (int a = 0; a < w.m; ++a) {
            const CVec& v = w.w[static_cast<std::size_t>(a)][q];
            for (Eigen::Index i = 0; i < v.size(); ++i)
                os << w.cells[q].r1 << ',' << w.cells[q].r2 << ',' << a << ',' << i << ',' << fmt(v(i).real()) << ','
                   << fmt(v(i).imag()) << '\n';
        }
}

void write_eigenphase_csv(std::ostream& os, const EigenCurves& c) {
    os << "j2,k2,curve,phase\n";
    for (int j = 0; j < c.nodes(); ++j)
        for (Eigen::Index i = 0; i < c.phase[static_cast<std::size_t>(j)].size(); ++i)
            os << j << ',' << fmt(static_cast<double>(j) / c.n2) << ',' << i << ','
               << fmt(c.phase[static_cast<std::size_t>(j)](i)) << '\n';
}

}  // namespace symfr
