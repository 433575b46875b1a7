#pragma once

#include <span>
#include <vector>

namespace satstack {

/// Index tuple (delta_1, ..., delta_{k-a+1}) of one partial-Bell monomial:
/// sum delta_l = a and sum l*delta_l = k.
struct PartitionTuple {
  std::vector<int> delta;
};

/// One monomial of B_{k,a}: integer coefficient times prod vals[l]^delta_l.
struct BellTerm {
  long long coeff;
  std::vector<int> delta;
};

/// All admissible tuples for (k, a), each exactly once, lexicographically
/// descending. Throws std::invalid_argument unless 1 <= a <= k.
std::vector<PartitionTuple> enumerate_partitions(int k, int a);

/// Memoized monomial list of B_{k,a}. Coefficients are exact 64-bit integers;
/// k is capped at kBellKMax to keep k! representable.
const std::vector<BellTerm>& bell_terms(int k, int a);

inline constexpr int kBellKMax = 20;

/// B_{k,a}(vals[0], ..., vals[k-a]); vals.size() >= k-a+1 required.
double bell_eval(int k, int a, std::span<const double> vals);

/// Same arithmetic as bell_eval but the arguments are upper bounds, so all of
/// them must be nonnegative.
double bell_eval_upper(int k, int a, std::span<const double> bounds);

/// k-th derivative of t -> rho(phi(t)) from the first k derivatives of each
/// factor: outer[a-1] = rho^(a) at phi(t), inner[l-1] = phi^(l) at t.
double faa_di_bruno(std::span<const double> outer, std::span<const double> inner);

} // namespace satstack
