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

#ifndef NKL_METRIC_CORE_HPP
#define NKL_METRIC_CORE_HPP

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "nkl/dyadic.hpp"
#include "nkl/rng.hpp"

namespace nkl {

/// A metric space is anything with a point type and a totally ordered,
/// non-negative distance scalar.  Exactness is a property of the scalar type:
/// Rational / Dyadic / int64 distances compare exactly (ties are detected by
/// equality), double distances are the inexact mode with tolerance 0.
template <class S>
concept MetricSpace = requires(const S& s, const typename S::point_type& p) {
  typename S::point_type;
  typename S::distance_type;
  { s.distance(p, p) } -> std::convertible_to<typename S::distance_type>;
};

enum class DistanceMode { Exact, Inexact };

template <class D>
constexpr DistanceMode distance_mode_of() {
  if constexpr (std::is_same_v<D, double>) return DistanceMode::Inexact;
  else return DistanceMode::Exact;
}

/// Ordered points with optional binary labels; order is meaningful (index
/// tie-breaking).  Indices are 0-based internally and 1-based in reports.
template <class P>
struct FiniteSample {
  std::vector<P> points;
  std::vector<std::uint8_t> labels;  // empty means unlabeled

  bool has_labels() const { return !labels.empty(); }
  std::size_t size() const { return points.size(); }

  void check() const {
    if (!labels.empty() && labels.size() != points.size())
      throw std::invalid_argument("FiniteSample: labels/points length mismatch");
  }
};

template <class P, class D>
struct ClosedBall {
  P center;
  D radius;
};

/// Ordered family of closed balls; the order is the extraction / tie-break
/// order.
template <class P, class D>
using BallFamily = std::vector<ClosedBall<P, D>>;

enum class BallKind { Closed, Open, Sphere };

/// Indices of sample points in the closed/open ball or sphere at `center`.
template <MetricSpace S>
std::vector<std::size_t> ball_members(const S& space, const std::vector<typename S::point_type>& pts,
                                      const typename S::point_type& center,
                                      const typename S::distance_type& r, BallKind kind) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    auto d = space.distance(pts[i], center);
    bool in = kind == BallKind::Closed ? !(r < d) : kind == BallKind::Open ? d < r : d == r;
    if (in) out.push_back(i);
  }
  return out;
}

/// Minimum radius r such that the closed ball at x (with x adjoined) holds at
/// least k+1 points, i.e. the k-th smallest distance from x to the sample.
/// Adjoining x to a sample that already contains x adds nothing, so exactly
/// one zero-distance occurrence is identified with the center; any further
/// coincident points stay ordinary candidates at distance zero.
template <MetricSpace S>
typename S::distance_type eps_knn_radius(const S& space,
                                         const std::vector<typename S::point_type>& pts,
                                         const typename S::point_type& x, int k) {
  using D = typename S::distance_type;
  std::vector<D> ds;
  ds.reserve(pts.size());
  const D zero{};
  bool dropped_self = false;
  for (const auto& p : pts) {
    D d = space.distance(p, x);
    if (!dropped_self && !(zero < d)) {
      dropped_self = true;
      continue;
    }
    ds.push_back(d);
  }
  if (k < 1 || static_cast<std::size_t>(k) > ds.size())
    throw std::invalid_argument(
        "eps_knn_radius: k must satisfy 1 <= k <= number of sample points distinct from x");
  std::nth_element(ds.begin(), ds.begin() + (k - 1), ds.end());
  return ds[k - 1];
}

struct MetricCheckFailure {
  std::size_t i, j, k;  // offending sample indices (k unused for symmetry)
};

/// Spot-check symmetry on `pairs` random pairs.  Exact scalars compare
/// exactly; doubles must agree bit-for-bit (tolerance 0 spaces).
template <MetricSpace S>
std::optional<MetricCheckFailure> check_symmetry(const S& space,
                                                 const std::vector<typename S::point_type>& pts,
                                                 std::size_t pairs, Rng& rng) {
  if (pts.size() < 2) return std::nullopt;
  for (std::size_t t = 0; t < pairs; ++t) {
    std::size_t i = rng.below(pts.size());
    std::size_t j = rng.below(pts.size());
    if (!(space.distance(pts[i], pts[j]) == space.distance(pts[j], pts[i])))
      return MetricCheckFailure{i, j, 0};
  }
  return std::nullopt;
}

/// Spot-check the triangle inequality on random triples.  Exact scalars are
/// lifted to rationals and checked strictly; doubles get a 2*tau slack.
template <MetricSpace S>
std::optional<MetricCheckFailure> check_triangle(const S& space,
                                                 const std::vector<typename S::point_type>& pts,
                                                 std::size_t triples, Rng& rng, double tau = 0.0) {
  using D = typename S::distance_type;
  if (pts.size() < 3) return std::nullopt;
  for (std::size_t t = 0; t < triples; ++t) {
    std::size_t i = rng.below(pts.size());
    std::size_t j = rng.below(pts.size());
    std::size_t k = rng.below(pts.size());
    D ab = space.distance(pts[i], pts[j]);
    D bc = space.distance(pts[j], pts[k]);
    D ac = space.distance(pts[i], pts[k]);
    if constexpr (std::is_same_v<D, double>) {
      if (ac > ab + bc + 2.0 * tau) return MetricCheckFailure{i, j, k};
    } else {
      if (to_exact(ac) > to_exact(ab) + to_exact(bc)) return MetricCheckFailure{i, j, k};
    }
  }
  return std::nullopt;
}

/// Strong (ultrametric) triangle inequality spot-check.
template <MetricSpace S>
std::optional<MetricCheckFailure> check_strong_triangle(const S& space,
                                                        const std::vector<typename S::point_type>& pts,
                                                        std::size_t triples, Rng& rng) {
  using D = typename S::distance_type;
  if (pts.size() < 3) return std::nullopt;
  for (std::size_t t = 0; t < triples; ++t) {
    std::size_t i = rng.below(pts.size());
    std::size_t j = rng.below(pts.size());
    std::size_t k = rng.below(pts.size());
    D ab = space.distance(pts[i], pts[j]);
    D bc = space.distance(pts[j], pts[k]);
    D ac = space.distance(pts[i], pts[k]);
    D m = ab < bc ? bc : ab;
    if (m < ac) return MetricCheckFailure{i, j, k};
  }
  return std::nullopt;
}

}  // namespace nkl

#endif
