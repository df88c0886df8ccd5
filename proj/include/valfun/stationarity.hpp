#pragma once

#include <map>
#include <string>
#include <vector>

#include "valfun/config.hpp"
#include "valfun/multipliers.hpp"
#include "valfun/problem.hpp"

namespace valfun {

enum class MpecClass { Weak, C, M, S };
const char* to_string(MpecClass c);

/// ε of the strict branch in the M class, and the slack used for "= 0" in the C and M patterns.
inline constexpr double kMpecEpsilon = 1e-8;

struct MpecMultipliers {
  VectorXd u, alpha, beta;
  VectorXd nu;  // normal-cone coefficients on the active x-box facets
};

struct MpecResult {
  bool holds = false;
  MpecClass target = MpecClass::Weak;
  MpecMultipliers mult;
  double residual = 0.0;
  IndexPartition partition;
  int patterns_tried = 0;
  std::string reason;
};

/// Searches for multipliers of the weak-stationarity system in the requested class.
MpecResult find_mpec_multipliers(const ParametricProblem& p, const Point& pt, MpecClass target,
                                 double activity_tol = 1e-6);

struct MpecCheck {
  double residual = 0.0;  // rows of the weak system
  bool in_class = false;  // sign conditions of the class on I_00
};

/// Re-evaluates given multipliers against the weak system and a class.
MpecCheck check_mpec_multipliers(const ParametricProblem& p, const Point& pt, const MpecMultipliers& mult,
                                 MpecClass target, double activity_tol = 1e-6);

struct WolfeResult {
  bool holds = false;
  VectorXd u;
  VectorXd nu;
  double residual = 0.0;
  bool unique = false;  // the u-solution set is a single point
  std::string reason;
};

/// The Wolfe system at (x, y, λ); boundary selects the version with N_X(x) from active box facets.
WolfeResult check_wolfe_system(const ParametricProblem& p, const VectorXd& x, const VectorXd& y,
                               const VectorXd& lambda, bool boundary, double activity_tol = 1e-6);

struct ConversionResult {
  MpecMultipliers mult;
  MpecCheck check;
};

/// α = −λ, β = −∇_y gᵀu, verified against the S class.
ConversionResult convert_wolfe_to_s(const ParametricProblem& p, const VectorXd& x, const VectorXd& y,
                                    const VectorXd& lambda, const VectorXd& u, const VectorXd& nu = VectorXd(),
                                    double activity_tol = 1e-6);

enum class SystemStatus { Holds, Fails, NotApplicable };
const char* to_string(SystemStatus s);

struct SystemVerdict {
  SystemStatus status = SystemStatus::NotApplicable;
  std::string reason;
  std::map<std::string, VectorXd> multipliers;
  double residual = 0.0;
};

struct StationarityCertificate {
  Point candidate;
  std::map<std::string, SystemVerdict> systems;
  IndexPartition partition;
  bool solution_verified = false;
  double activity_tol = 1e-6;
  double epsilon = kMpecEpsilon;
  std::vector<std::string> warnings;
  std::vector<std::string> assumptions;
};

StationarityCertificate certify_point(const ParametricProblem& p, const VectorXd& x, const VectorXd& y,
                                      const SolverConfig& cfg);

/// S ⇒ M ⇒ C ⇒ weak over the certificate's mpec entries.
bool hierarchy_consistent(const StationarityCertificate& c);

}  // namespace valfun
