#pragma once
// JSON and CSV writers. JSON objects keep sorted keys and fixed array
// orders, so equal inputs give byte-identical files. Layouts: docs/formats.md.

#include <ostream>
#include <string>

#include "json.hpp"
#include "symfr/frames2d.hpp"
#include "symfr/models.hpp"
#include "symfr/wannier.hpp"
#include "symfr/z2.hpp"

namespace symfr {

using Json = nlohmann::json;

// doubles that JSON cannot hold (inf, nan) become the strings "inf", "-inf", "nan"
Json number(double x);

Json to_json(const Tolerances& t);
Json to_json(const AssumptionReport& r);
Json to_json(const FrameResiduals& r);
Json to_json(const MatchingChecks& c);
Json to_json(const BetaChecks& c);
Json to_json(const GrafPortaIndex& g);
Json to_json(const Z2Report& r);
Json to_json(const DecayFit& d);
Json to_json(const ApproximantFamily& f);

// pretty printed with two-space indent and a trailing newline
void write_json(const std::string& path, const Json& j);
std::string dump(const Json& j);

// j1,j2,k1,k2,row,col,re,im for every stored sample
void write_frame_csv(std::ostream& os, const FrameField& f);
// j1,j2,k1,k2,F
void write_curvature_csv(std::ostream& os, const CurvatureGrid& c);
// r1,r2,a,component,re,im
void write_wannier_csv(std::ostream& os, const WannierSet& w);
// j2,k2,curve,phase over [0, 1/2]
void write_eigenphase_csv(std::ostream& os, const EigenCurves& c);

// %.17g: round-trips, and a given double always prints the same way
std::string fmt(double x);

}  // namespace symfr
