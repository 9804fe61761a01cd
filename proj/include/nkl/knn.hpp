// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NKL_KNN_HPP
#define NKL_KNN_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "nkl/metric_core.hpp"

namespace nkl {

/// Distance ties on the decisive sphere are resolved either by ascending
/// index (deterministic) or uniformly at random without replacement (seeded,
/// deterministic per seed).
struct TieBreakPolicy {
  enum class Kind { IndexOrder, UniformRandom };
  Kind kind = Kind::IndexOrder;
  std::uint64_t seed = 0;

  static TieBreakPolicy index_order() { return {Kind::IndexOrder, 0}; }
  static TieBreakPolicy uniform(std::uint64_t seed) { return {Kind::UniformRandom, seed}; }
};

/// Chosen neighbor indices plus the selection radius and ball counts.  The
/// open ball's sample points are always all included; sphere points only fill
/// the remainder.
template <class D>
struct NeighborSet {
  std::vector<std::size_t> indices;  // exactly k, unordered between sphere picks
  D radius{};                        // k-th smallest candidate distance
  std::size_t open_count = 0;        // candidates strictly inside
  std::size_t sphere_count = 0;      // candidates at exactly the radius
};

/// k nearest candidates of x among pts (all of pts are candidates; a sample
/// point identical to x occupies a slot at distance zero).  Ties on the
/// sphere at the k-th distance are resolved by `policy`.
template <MetricSpace S>
NeighborSet<typename S::distance_type> k_nearest(const S& space,
                                                 const std::vector<typename S::point_type>& pts,
                                                 const typename S::point_type& x, int k,
                                                 const TieBreakPolicy& policy) {
  using D = typename S::distance_type;
  const std::size_t n = pts.size();
  if (k < 1 || static_cast<std::size_t>(k) > n)
    throw std::invalid_argument("k_nearest: k must satisfy 1 <= k <= number of candidates");
  std::vector<D> dist(n);
  for (std::size_t i = 0; i < n; ++i) dist[i] = space.distance(pts[i], x);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::nth_element(order.begin(), order.begin() + (k - 1), order.end(),
                   [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
  D radius = dist[order[static_cast<std::size_t>(k - 1)]];

  NeighborSet<D> ns;
  ns.radius = radius;
  std::vector<std::size_t> sphere;
  for (std::size_t i = 0; i < n; ++i) {
    if (dist[i] < radius) ns.indices.push_back(i);
    else if (dist[i] == radius) sphere.push_back(i);
  }
  ns.open_count = ns.indices.size();
  ns.sphere_count = sphere.size();
  std::size_t need = static_cast<std::size_t>(k) - ns.open_count;
  if (policy.kind == TieBreakPolicy::Kind::IndexOrder) {
    // sphere is already in ascending index order
    ns.indices.insert(ns.indices.end(), sphere.begin(), sphere.begin() + static_cast<std::ptrdiff_t>(need));
  } else {
    Rng rng(policy.seed);
    for (std::size_t t = 0; t < need; ++t) {
      std::size_t j = t + static_cast<std::size_t>(rng.below(sphere.size() - t));
      std::swap(sphere[t], sphere[j]);
      ns.indices.push_back(sphere[t]);
    }
  }
  return ns;
}

/// Mean label over the neighbor set: eta_n(x) = (1/k) sum_{i in N_k} y_i.
template <class D>
double eta_n_from(const NeighborSet<D>& ns, const std::vector<std::uint8_t>& labels) {
  std::size_t ones = 0;
  for (auto i : ns.indices) ones += labels[i];
  return static_cast<double>(ones) / static_cast<double>(ns.indices.size());
}

template <MetricSpace S>
double eta_n(const S& space, const FiniteSample<typename S::point_type>& sample,
             const typename S::point_type& x, int k, const TieBreakPolicy& policy) {
  if (!sample.has_labels()) throw std::invalid_argument("eta_n: labels required");
  return eta_n_from(k_nearest(space, sample.points, x, k, policy), sample.labels);
}

/// Majority vote with the non-strict threshold: 1 iff eta_n >= 1/2, i.e.
/// 2 * (#ones) >= k in integers (voting ties go to label 1).
template <class D>
int predict_from(const NeighborSet<D>& ns, const std::vector<std::uint8_t>& labels) {
  std::size_t ones = 0;
  for (auto i : ns.indices) ones += labels[i];
  return 2 * ones >= ns.indices.size() ? 1 : 0;
}

template <MetricSpace S>
int predict(const S& space, const FiniteSample<typename S::point_type>& sample,
            const typename S::point_type& x, int k, const TieBreakPolicy& policy) {
  if (!sample.has_labels()) throw std::invalid_argument("predict: labels required");
  return predict_from(k_nearest(space, sample.points, x, k, policy), sample.labels);
}

/// Bayes classifier: threshold the regression function at 1/2, non-strict.
inline int bayes_classify(double eta_x) {
  if (eta_x < 0.0 || eta_x > 1.0) throw std::invalid_argument("bayes_classify: eta outside [0,1]");
  return eta_x >= 0.5 ? 1 : 0;
}

struct MonteCarloEstimate {
  double mean = 0.0;
  double se = 0.0;
  long long trials = 0;
  double sum = 0.0;
  double sumsq = 0.0;
};

inline MonteCarloEstimate finish_estimate(double sum, double sumsq, long long n) {
  MonteCarloEstimate e;
  e.trials = n;
  e.sum = sum;
  e.sumsq = sumsq;
  e.mean = sum / static_cast<double>(n);
  double var = (sumsq - sum * sum / static_cast<double>(n)) / std::max(1.0, static_cast<double>(n - 1));
  e.se = std::sqrt(std::max(0.0, var) / static_cast<double>(n));
  return e;
}

/// Monte Carlo estimate of the Bayes error E[min(eta(X), 1 - eta(X))].
template <class Dist>
MonteCarloEstimate bayes_error_mc(const Dist& dist, long long trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("bayes_error_mc: trials >= 1 required");
  Rng rng(seed);
  double sum = 0.0, sumsq = 0.0;
  for (long long t = 0; t < trials; ++t) {
    double e = dist.eta(dist.sample(rng));
    double v = std::min(e, 1.0 - e);
    sum += v;
    sumsq += v * v;
  }
  return finish_estimate(sum, sumsq, trials);
}

/// eta~_n(x) = (1/k) sum_{i in N_k} eta(x_i): the neighbor average of the
/// true regression function (diagnostic; shares the neighbor set with eta_n).
template <MetricSpace S, class EtaFn>
double eta_tilde(const S& space, const FiniteSample<typename S::point_type>& sample,
                 const typename S::point_type& x, int k, const TieBreakPolicy& policy,
                 EtaFn&& eta) {
  auto ns = k_nearest(space, sample.points, x, k, policy);
  double s = 0.0;
  for (auto i : ns.indices) s += eta(sample.points[i]);
  return s / static_cast<double>(ns.indices.size());
}

/// McShane-style extension of f (values in [0,1] on a finite Q):
/// min{1, min_y f(y) + rho(x, y)}.  1-Lipschitz whenever f is on Q.
template <MetricSpace S>
double lipschitz_extend(const S& space, const std::vector<typename S::point_type>& q,
                        const std::vector<double>& f, const typename S::point_type& x) {
  if (q.empty()) throw std::invalid_argument("lipschitz_extend: Q must be nonempty");
  if (q.size() != f.size()) throw std::invalid_argument("lipschitz_extend: |f| != |Q|");
  double best = 1.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (f[i] < 0.0 || f[i] > 1.0)
      throw std::invalid_argument("lipschitz_extend: f values must lie in [0,1]");
    best = std::min(best, f[i] + to_real(space.distance(x, q[i])));
  }
  return best;
}

}  // namespace nkl

#endif
