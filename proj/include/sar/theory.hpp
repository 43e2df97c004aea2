#pragma once

#include "sar/forward_problem.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sar {

struct TheoryParams {
  double eta = 0.5;
  double delta0 = 1.0;
  double gamma = 1.0 / 3.0;
  double c_R = 1.0;
  double eps0 = 1.0;
  double tau = 6.0;
  double sigma = 0.0;
};

/// Raised when the constants chain has no admissible solution.
class ChainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct NamedConstant {
  std::string name;
  double value;
  std::string formula;
};

struct ConstantsTable {
  TheoryParams params;
  double g0 = 0, c_gamma = 0, c_a = 0, c_b = 0;
  double c0 = 0, c1 = 0, c2 = 0, c3 = 0;
  double c_Gamma = 0, c_star = 0, E_max = 0;
  double ce0 = 0, ce1 = 0, ce2 = 0, ce3 = 0, ce4 = 0, ce = 0;

  double tau_threshold = 0;  // (2 + 2 eta) / (2 - (2 + eps0) eta)
  double eps0_lower = 0;     // max{(2 - sqrt 2)/eta - (2 + sqrt 2), 0}
  double eps0_upper = 0;     // 2 (1/eta - 1)

  /// Rows in display order, including the inputs eps0 and tau.
  std::vector<NamedConstant> rows() const;
};

/// Closed-form constants of the rate analysis. Throws std::invalid_argument
/// for inadmissible inputs and ChainError when c1 >= 1 or tau^2 <= 2.
/// tau may sit on its threshold (the closed interval is accepted here).
ConstantsTable constants_table(const TheoryParams& p);

/// Published reference values for the default parameters, with the number of
/// decimals each was printed with.
struct ReferenceConstant {
  std::string name;
  double value;
  int decimals;
};
const std::vector<ReferenceConstant>& reference_constants();

struct GoldenComparison {
  std::string name;
  double computed;
  double reference;
  double relative_error;
  bool pass;
};
/// Pass iff relative error <= rel_tol or |computed - reference| is within half
/// a unit of the reference's last printed decimal.
std::vector<GoldenComparison> compare_with_reference(const ConstantsTable& table, double rel_tol = 1e-3);

struct BoundCheck {
  double lhs;
  double rhs;
  bool holds;
};

/// lhs = int_0^t ds / ((1+t-s)^k (1+s)^j) by adaptive Gauss-Kronrod,
/// rhs = (2^{k+j} - 2)/(k+j-1) (1+t)^{-(k+j-1)}, holds = lhs < rhs.
BoundCheck integral_decay_bound(double k, double j, double t);

/// lhs = sup_{0<=lambda<=1} lambda^gamma e^{-lambda t} on a 10^6-point grid
/// plus lambda = min(gamma/t, 1); rhs = max{gamma^gamma, 1} / (1+t)^gamma.
BoundCheck sup_bound(double gamma, double t);

struct ConeEstimate {
  double eta_hat = 0.0;
  std::size_t evaluated = 0;
  std::size_t zero_denominators = 0;
};

/// Largest ||F(z) - F(x) - F'(x)(z - x)|| / ||F(x) - F(z)|| over `samples`
/// random pairs in the ball of `radius` around `center`.
ConeEstimate tangential_cone_estimate(const ForwardProblem& problem, const GridVector& center, double radius,
                                      int samples, std::uint64_t seed);

struct SweepCase {
  double a;  // k, or gamma
  double b;  // j, unused for the sup bound
  double t;
  BoundCheck check;
};

struct SweepResult {
  int samples = 0;
  int failures = 0;
  std::vector<SweepCase> first_failures;  // at most ten
  double worst_ratio = 0.0;               // max lhs / rhs
};

/// Random sweep of integral_decay_bound over k, j in [0, 3] with
/// k + j in (1.05, 6) and t in [0, 1000].
SweepResult sweep_integral_bound(int samples, std::uint64_t seed);
/// Random sweep of sup_bound over gamma in [0, 2] and t in [0, 1000].
SweepResult sweep_sup_bound(int samples, std::uint64_t seed);

}  // namespace sar
