#include "qoc/controllability.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace qoc {

namespace {

constexpr double kIndependenceTol = 1e-9;

double real_inner(const Matrix& a, const Matrix& b) {
  return (a.adjoint() * b).trace().real();
}

// Modified Gram-Schmidt against the basis with one re-orthogonalization
// pass; returns true if the candidate extended the basis.
bool try_extend(std::vector<Matrix>& basis, Matrix candidate) {
  const double scale = std::sqrt(real_inner(candidate, candidate));
  if (scale <= 0.0) return false;
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& e : basis) candidate -= real_inner(e, candidate) * e;
  const double residual = std::sqrt(real_inner(candidate, candidate));
  if (residual <= kIndependenceTol * scale) return false;
  basis.push_back(candidate / residual);
  return true;
}

// Existence of a nonsingular complex skew-symmetric J with
// X^T J + J X = 0 for every basis element X.
bool invariant_skew_form_exists(const std::vector<Matrix>& basis, int n) {
  const int unknowns = n * (n - 1) / 2;
  if (unknowns == 0) return false;
  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) pairs.emplace_back(a, b);

  Matrix system(static_cast<int>(basis.size()) * n * n, unknowns);
  system.setZero();
  for (size_t k = 0; k < basis.size(); ++k) {
    const Matrix& x = basis[k];
    for (int u = 0; u < unknowns; ++u) {
      Matrix j = Matrix::Zero(n, n);
      j(pairs[u].first, pairs[u].second) = 1.0;
      j(pairs[u].second, pairs[u].first) = -1.0;
      Matrix c = x.transpose() * j + j * x;
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s)
          system(static_cast<int>(k) * n * n + r * n + s, u) = c(r, s);
    }
  }

  Eigen::JacobiSVD<Matrix> svd(system, Eigen::ComputeThinV);
  const auto& sing = svd.singularValues();
  const double top = sing.size() ? sing(0) : 0.0;
  if (top == 0.0) return false;
  const int last = static_cast<int>(sing.size()) - 1;
  if (sing(last) > 1e-9 * top) return false;

  Matrix j = Matrix::Zero(n, n);
  for (int u = 0; u < unknowns; ++u) {
    j(pairs[u].first, pairs[u].second) = svd.matrixV()(u, last);
    j(pairs[u].second, pairs[u].first) = -svd.matrixV()(u, last);
  }
  Eigen::JacobiSVD<Matrix> jsvd(j);
  const auto& js = jsvd.singularValues();
  return js(js.size() - 1) > 1e-9 * js(0);
}

}  // namespace

const char* to_string(ControllabilityVerdict verdict) {
  switch (verdict) {
    case ControllabilityVerdict::controllable_su: return "controllable_su";
    case ControllabilityVerdict::controllable_sp: return "controllable_sp";
    case ControllabilityVerdict::not_controllable: return "not_controllable";
    case ControllabilityVerdict::undetermined: return "undetermined";
  }
  return "undetermined";
}

Matrix traceless_part(const Matrix& h) {
  if (h.rows() != h.cols()) throw std::invalid_argument("traceless_part: not square");
  const double n = static_cast<double>(h.rows());
  return h - (h.trace() / n) * Matrix::Identity(h.rows(), h.cols());
}

LieClosureReport lie_closure(const std::vector<Matrix>& generators, int depth_cap) {
  if (generators.empty()) throw std::invalid_argument("lie_closure: no generators");
  const int n = static_cast<int>(generators.front().rows());
  for (const auto& g : generators) {
    if (g.rows() != n || g.cols() != n)
      throw std::invalid_argument("lie_closure: generator dimension mismatch");
    const double scale = std::max(max_abs(g), 1.0);
    if (max_abs(g + g.adjoint()) > 1e-9 * scale)
      throw std::invalid_argument("lie_closure: generator is not skew-Hermitian");
    if (std::abs(g.trace()) > 1e-9 * scale)
      throw std::invalid_argument("lie_closure: generator is not traceless");
  }

  const int max_dim = n * n - 1;
  LieClosureReport report;
  size_t frontier_begin = 0;
  for (const auto& g : generators) try_extend(report.basis, g);

  int depth = 0;
  bool grew = true;
  while (grew && depth < depth_cap && static_cast<int>(report.basis.size()) < max_dim) {
    grew = false;
    const size_t frontier_end = report.basis.size();
    ++depth;
    for (size_t i = frontier_begin; i < frontier_end; ++i)
      for (const auto& g : generators) {
        if (try_extend(report.basis, commutator(report.basis[i], g))) grew = true;
        if (static_cast<int>(report.basis.size()) >= max_dim) break;
      }
    frontier_begin = frontier_end;
  }

  report.dimension = static_cast<int>(report.basis.size());
  report.depth_reached = depth;
  report.closed = !grew || report.dimension >= max_dim;
  return report;
}

LieClosureReport projective_controllability_verdict(const ControlSystem& system, int depth_cap) {
  const int n = system.dim();
  if (depth_cap < 0) depth_cap = 2 * n * n;
  const Complex mi(0.0, -1.0);
  std::vector<Matrix> generators;
  generators.push_back(mi * traceless_part(system.drift));
  for (const auto& h : system.controls) generators.push_back(mi * traceless_part(h));

  LieClosureReport report = lie_closure(generators, depth_cap);
  if (!report.closed) {
    report.verdict = ControllabilityVerdict::undetermined;
    return report;
  }
  if (report.dimension == n * n - 1) {
    report.verdict = ControllabilityVerdict::controllable_su;
  } else if (n % 2 == 0 && report.dimension == n * (n + 1) / 2 &&
             invariant_skew_form_exists(report.basis, n)) {
    report.verdict = ControllabilityVerdict::controllable_sp;
  } else {
    report.verdict = ControllabilityVerdict::not_controllable;
  }
  return report;
}

}  // namespace qoc
