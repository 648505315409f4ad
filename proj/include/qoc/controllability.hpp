#pragma once

#include "qoc/core.hpp"

namespace qoc {

enum class ControllabilityVerdict {
  controllable_su,
  controllable_sp,
  not_controllable,
  undetermined,
};

const char* to_string(ControllabilityVerdict verdict);

/// Result of closing the generator set under commutators over the reals.
struct LieClosureReport {
  int dimension = 0;
  std::vector<Matrix> basis;  // orthonormal under Re Tr(A^dag B)
  int depth_reached = 0;
  bool closed = false;
  ControllabilityVerdict verdict = ControllabilityVerdict::undetermined;
};

/// H - (Tr H / n) I.
Matrix traceless_part(const Matrix& h);

LieClosureReport lie_closure(const std::vector<Matrix>& generators, int depth_cap);

/// Lie-rank test on {-i H0, -i H_1, ..., -i H_m} after traceless
/// normalization; verdict per the su(n) / sp(n/2) dimension and
/// invariant-skew-form criteria.
LieClosureReport projective_controllability_verdict(const ControlSystem& system,
                                                    int depth_cap = -1);

}  // namespace qoc
