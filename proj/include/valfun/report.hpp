#pragma once

#include <string>

#include "json.hpp"
#include "valfun/cq.hpp"
#include "valfun/stationarity.hpp"
#include "valfun/subdiff.hpp"
#include "valfun/valuefn.hpp"
#include "valfun/wolfe.hpp"

namespace valfun::report {

using nlohmann::json;

inline constexpr const char* kSchemaVersion = "1";

json number(double v);
json vector(const VectorXd& v);

json problem(const ParametricProblem& p);
json config(const SolverConfig& c);
json solve(const SolveReport& r);
json estimate(const EstimateSet& e);
json cq(const CqReport& r);
json dual(const DualResult& d);
json weak_duality(const WeakDualityReport& r);
json wolfe(const WolfeResult& w);
json mpec(const MpecMultipliers& m);
json certificate(const StationarityCertificate& c);
json partition(const IndexPartition& p);
json oracle(const std::vector<GradientSample>& samples);

/// The report envelope: schema_version, command, problem, config, results, warnings.
json envelope(const std::string& command, const ParametricProblem& p, const SolverConfig& c, json results,
              json warnings);

}  // namespace valfun::report
