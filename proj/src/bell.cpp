#include "satstack/bell.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>

namespace satstack {

namespace {

void check_indices(int k, int a) {
  if (k < 1 || a < 1 || a > k)
    throw std::invalid_argument("bell: need 1 <= a <= k, got k=" + std::to_string(k) +
                                " a=" + std::to_string(a));
  if (k > kBellKMax)
    throw std::invalid_argument("bell: k=" + std::to_string(k) + " exceeds table cap " +
                                std::to_string(kBellKMax));
}

void enumerate_rec(int pos, int m, int rem_count, int rem_weight, std::vector<int>& cur,
                   std::vector<PartitionTuple>& out) {
  if (pos == m) {
    if (rem_count == 0 && rem_weight == 0) out.push_back({cur});
    return;
  }
  const int l = pos + 1;
  const int hi = std::min(rem_count, rem_weight / l);
  for (int d = hi; d >= 0; --d) {
    cur[pos] = d;
    enumerate_rec(pos + 1, m, rem_count - d, rem_weight - l * d, cur, out);
  }
  cur[pos] = 0;
}

long long factorial_ll(int n) {
  long long f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

long long tuple_coefficient(int k, const std::vector<int>& delta) {
  long long den = 1;
  for (std::size_t l = 0; l < delta.size(); ++l) {
    den *= factorial_ll(delta[l]);
    const long long lf = factorial_ll(static_cast<int>(l) + 1);
    for (int rep = 0; rep < delta[l]; ++rep) den *= lf;
  }
  const long long num = factorial_ll(k);
  if (num % den != 0) throw std::logic_error("bell: non-integer monomial coefficient");
  return num / den;
}

} // namespace

std::vector<PartitionTuple> enumerate_partitions(int k, int a) {
  check_indices(k, a);
  const int m = k - a + 1;
  std::vector<PartitionTuple> out;
  std::vector<int> cur(m, 0);
  enumerate_rec(0, m, a, k, cur, out);
  return out;
}

const std::vector<BellTerm>& bell_terms(int k, int a) {
  check_indices(k, a);
  static std::map<std::pair<int, int>, std::vector<BellTerm>> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find({k, a});
  if (it == cache.end()) {
    std::vector<BellTerm> terms;
    for (auto& t : enumerate_partitions(k, a))
      terms.push_back({tuple_coefficient(k, t.delta), std::move(t.delta)});
    it = cache.emplace(std::make_pair(k, a), std::move(terms)).first;
  }
  return it->second;
}

double bell_eval(int k, int a, std::span<const double> vals) {
  check_indices(k, a);
  const std::size_t need = static_cast<std::size_t>(k - a + 1);
  if (vals.size() < need)
    throw std::invalid_argument("bell_eval: need at least " + std::to_string(need) + " values");
  double sum = 0.0;
  for (const auto& term : bell_terms(k, a)) {
    double prod = static_cast<double>(term.coeff);
    for (std::size_t l = 0; l < term.delta.size(); ++l)
      for (int rep = 0; rep < term.delta[l]; ++rep) prod *= vals[l];
    sum += prod;
  }
  return sum;
}

double bell_eval_upper(int k, int a, std::span<const double> bounds) {
  const std::size_t need = static_cast<std::size_t>(k - a + 1);
  for (std::size_t l = 0; l < bounds.size() && l < need; ++l)
    if (bounds[l] < 0.0) throw std::invalid_argument("bell_eval_upper: negative bound");
  return bell_eval(k, a, bounds);
}

double faa_di_bruno(std::span<const double> outer, std::span<const double> inner) {
  const int k = static_cast<int>(outer.size());
  if (k < 1) throw std::invalid_argument("faa_di_bruno: k >= 1 required");
  if (inner.size() != outer.size())
    throw std::invalid_argument("faa_di_bruno: outer/inner length mismatch");
  double sum = 0.0;
  for (int a = 1; a <= k; ++a) sum += outer[a - 1] * bell_eval(k, a, inner);
  return sum;
}

} // namespace satstack
