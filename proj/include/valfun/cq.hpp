#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "valfun/problem.hpp"

namespace valfun {

enum class CqKind { LicqInner, LicqDualSystem, MpecLicq, Mfcq, CrcqSampled };
enum class CqVerdict { Holds, Fails, HoldsOnSamples };
enum class LicqSystem { Inner, DualSystem, MpecBranch };

const char* to_string(CqKind k);
const char* to_string(CqVerdict v);

struct CqReport {
  CqKind kind = CqKind::LicqInner;
  CqVerdict verdict = CqVerdict::Holds;
  MatrixXd family;                 // one gradient per row
  std::vector<std::string> labels;  // what each row is
  int rank = 0;
  int family_size = 0;
  VectorXd witness;                 // null combination (LICQ) or unit-norm λ (MFCQ)
  std::vector<int> witness_subset;  // CRCQ, 0-based constraint indices
  VectorXd sample_x, sample_y;      // CRCQ rank-change sample
  int rank_center = 0, rank_sample = 0;
  int samples = 0;
  double rank_tol = 1e-8;
  double activity_tol = 1e-6;
};

/// LICQ for the inner system, the Wolfe-dual constraint system, or the MPEC branch system.
/// The dual and branch systems need pt.lambda.
CqReport check_licq(const ParametricProblem& p, const Point& pt, LicqSystem system, double activity_tol = 1e-6,
                    double rank_tol = 1e-8);

CqReport check_mfcq(const ParametricProblem& p, const VectorXd& x, const VectorXd& y, double activity_tol = 1e-6,
                    double lp_tol = 1e-9);

/// Rank constancy of every active-gradient subfamily on samples from a (x,y)-ball.
CqReport check_crcq_sampled(const ParametricProblem& p, const VectorXd& x, const VectorXd& y, double radius,
                            int n_samples, std::uint64_t seed = 20240611, double activity_tol = 1e-6,
                            double rank_tol = 1e-8);

}  // namespace valfun
