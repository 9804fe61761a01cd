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

#ifndef NKL_DIMENSION_HPP
#define NKL_DIMENSION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nkl/metric_core.hpp"

namespace nkl {

/// A family is unconnected when no ball contains another ball's center:
/// rho(c_i, c_j) > max(r_i, r_j) for all i != j.
template <MetricSpace S>
bool is_unconnected(const S& space,
                    const BallFamily<typename S::point_type, typename S::distance_type>& family) {
  if (family.empty()) throw std::invalid_argument("is_unconnected: family must be nonempty");
  for (std::size_t i = 0; i < family.size(); ++i) {
    for (std::size_t j = i + 1; j < family.size(); ++j) {
      auto d = space.distance(family[i].center, family[j].center);
      const auto& rmax = family[i].radius < family[j].radius ? family[j].radius : family[i].radius;
      if (!(rmax < d)) return false;
    }
  }
  return true;
}

/// Number of balls of the family whose closed ball contains x.
template <MetricSpace S>
std::size_t multiplicity(const S& space, const typename S::point_type& x,
                         const BallFamily<typename S::point_type, typename S::distance_type>& family) {
  std::size_t count = 0;
  for (const auto& b : family)
    if (!(b.radius < space.distance(x, b.center))) ++count;
  return count;
}

template <class P, class D>
struct CoverExtraction {
  BallFamily<P, D> subfamily;               // rounds concatenated, index order inside a round
  std::vector<std::vector<std::size_t>> rounds;  // original indices per round
};

/// Greedy round extraction: round p takes, in ascending input index, every
/// ball whose center is not yet covered by earlier rounds and that stays
/// unconnected with the balls already in the round.  Every input center ends
/// up covered and each round is an unconnected family.
template <MetricSpace S>
CoverExtraction<typename S::point_type, typename S::distance_type> extract_cover_subfamily(
    const S& space, const BallFamily<typename S::point_type, typename S::distance_type>& family) {
  using P = typename S::point_type;
  using D = typename S::distance_type;
  CoverExtraction<P, D> out;
  std::vector<bool> taken(family.size(), false), covered(family.size(), false);
  auto center_covered_by = [&](std::size_t i, std::size_t j) {
    return !(family[j].radius < space.distance(family[i].center, family[j].center));
  };
  std::size_t covered_count = 0;
  while (covered_count < family.size()) {
    std::vector<std::size_t> round;
    for (std::size_t i = 0; i < family.size(); ++i) {
      if (taken[i] || covered[i]) continue;
      bool ok = true;
      for (auto j : round) {
        auto d = space.distance(family[i].center, family[j].center);
        const auto& rmax =
            family[i].radius < family[j].radius ? family[j].radius : family[i].radius;
        if (!(rmax < d)) {
          ok = false;
          break;
        }
      }
      if (ok) {
        round.push_back(i);
        taken[i] = true;
      }
    }
    for (auto j : round) {
      for (std::size_t i = 0; i < family.size(); ++i) {
        if (!covered[i] && center_covered_by(i, j)) {
          covered[i] = true;
          ++covered_count;
        }
      }
    }
    out.rounds.push_back(round);
    if (round.empty()) throw std::logic_error("extract_cover_subfamily: no progress");
  }
  for (const auto& round : out.rounds)
    for (auto i : round) out.subfamily.push_back(family[i]);
  return out;
}

enum class DimVerdict { ConsistentWithDim, Violation };

/// Replayable certificate: the witnessing points (1-based indices into Q),
/// the probe, and for the scale-bounded check the radii.  "Consistent" means
/// no violation was found on the search performed, which is exhaustive over
/// the supplied finite data; it is a semi-decision for the underlying
/// infinite definition.
template <class P, class D>
struct DimensionWitness {
  DimVerdict verdict = DimVerdict::ConsistentWithDim;
  std::vector<std::size_t> point_indices;  // 1-based
  std::vector<P> points;
  std::vector<D> radii;  // metric-dimension check only
  P probe{};
  std::size_t probe_index = 0;  // 1-based
  unsigned long long tuples_searched = 0;
};

struct WitnessOptions {
  unsigned long long budget = 1000000;  // hard cap on candidate tuples
  bool sample_fallback = false;         // sample up to budget tuples instead of failing
  std::uint64_t sample_seed = 0;
};

namespace detail {

inline bool next_combination(std::vector<std::size_t>& c, std::size_t n) {
  std::size_t m = c.size();
  for (std::size_t i = m; i-- > 0;) {
    if (c[i] < n - (m - i)) {
      ++c[i];
      for (std::size_t j = i + 1; j < m; ++j) c[j] = c[j - 1] + 1;
      return true;
    }
  }
  return false;
}

inline unsigned long long binomial_capped(std::size_t n, std::size_t r, unsigned long long cap) {
  if (r > n) return 0;
  unsigned long long v = 1;
  for (std::size_t i = 0; i < r; ++i) {
    if (v > cap) return cap + 1;
    v = v * (n - i) / (i + 1);
  }
  return v;
}

}  // namespace detail

/// Nagata-dimension witness: a violation of dimension d is a (d+2)-subset of
/// Q and a probe a with rho(x_i, x_j) > max(rho(a,x_i), rho(a,x_j)) for every
/// pair.  Exhaustive lexicographic search (subsets outer, probes inner); the
/// reported certificate is the first violation in that order.
template <MetricSpace S>
DimensionWitness<typename S::point_type, typename S::distance_type> nagata_dim_witness(
    const S& space, const std::vector<typename S::point_type>& q,
    const std::vector<typename S::point_type>& probes, int d, const WitnessOptions& opts = {}) {
  using P = typename S::point_type;
  using D = typename S::distance_type;
  if (d < 0) throw std::invalid_argument("nagata_dim_witness: d >= 0 required");
  const std::size_t m = static_cast<std::size_t>(d) + 2;
  DimensionWitness<P, D> w;
  if (q.size() < m || probes.empty()) return w;

  auto check_tuple = [&](const std::vector<std::size_t>& idx, const P& a) {
    for (std::size_t i = 0; i < idx.size(); ++i) {
      D dai = space.distance(a, q[idx[i]]);
      for (std::size_t j = i + 1; j < idx.size(); ++j) {
        D daj = space.distance(a, q[idx[j]]);
        D dij = space.distance(q[idx[i]], q[idx[j]]);
        const D& mx = dai < daj ? daj : dai;
        if (!(mx < dij)) return false;
      }
    }
    return true;
  };
  auto record = [&](const std::vector<std::size_t>& idx, std::size_t pi) {
    w.verdict = DimVerdict::Violation;
    for (auto i : idx) {
      w.point_indices.push_back(i + 1);
      w.points.push_back(q[i]);
    }
    w.probe = probes[pi];
    w.probe_index = pi + 1;
  };

  unsigned long long nsub = detail::binomial_capped(q.size(), m, opts.budget + 1);
  if (nsub > opts.budget || nsub * probes.size() > opts.budget) {
    if (!opts.sample_fallback)
      throw std::runtime_error(
          "nagata_dim_witness: combinatorial budget exceeded; enable the sampling fallback");
    Rng rng(opts.sample_seed);
    for (unsigned long long t = 0; t < opts.budget; ++t) {
      std::vector<std::size_t> idx;
      while (idx.size() < m) {
        std::size_t c = rng.below(q.size());
        if (std::find(idx.begin(), idx.end(), c) == idx.end()) idx.push_back(c);
      }
      std::sort(idx.begin(), idx.end());
      std::size_t pi = rng.below(probes.size());
      ++w.tuples_searched;
      if (check_tuple(idx, probes[pi])) {
        record(idx, pi);
        return w;
      }
    }
    return w;
  }

  std::vector<std::size_t> idx(m);
  for (std::size_t i = 0; i < m; ++i) idx[i] = i;
  do {
    for (std::size_t pi = 0; pi < probes.size(); ++pi) {
      ++w.tuples_searched;
      if (check_tuple(idx, probes[pi])) {
        record(idx, pi);
        return w;
      }
    }
  } while (detail::next_combination(idx, q.size()));
  return w;
}

/// Replay a violation certificate against the definition.
template <MetricSpace S>
bool verify_nagata_violation(const S& space,
                             const DimensionWitness<typename S::point_type, typename S::distance_type>& w) {
  if (w.verdict != DimVerdict::Violation) return false;
  for (std::size_t i = 0; i < w.points.size(); ++i) {
    auto dai = space.distance(w.probe, w.points[i]);
    for (std::size_t j = i + 1; j < w.points.size(); ++j) {
      auto daj = space.distance(w.probe, w.points[j]);
      auto dij = space.distance(w.points[i], w.points[j]);
      const auto& mx = dai < daj ? daj : dai;
      if (!(mx < dij)) return false;
    }
  }
  return true;
}

/// All realized pairwise distances (points and probes pooled), the only radii
/// at which closed-ball membership can change.  Exact-mode grid.
template <MetricSpace S>
std::vector<typename S::distance_type> realized_distance_grid(
    const S& space, const std::vector<typename S::point_type>& pts,
    const std::vector<typename S::point_type>& probes) {
  using D = typename S::distance_type;
  std::vector<typename S::point_type> all = pts;
  all.insert(all.end(), probes.begin(), probes.end());
  std::vector<D> g;
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      D d = space.distance(all[i], all[j]);
      if (D{} < d) g.push_back(d);
    }
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

/// Midpoints between consecutive realized distances (plus half the smallest),
/// the inexact-mode grid.
template <MetricSpace S>
std::vector<double> midpoint_distance_grid(const S& space,
                                           const std::vector<typename S::point_type>& pts,
                                           const std::vector<typename S::point_type>& probes) {
  auto g = realized_distance_grid(space, pts, probes);
  std::vector<double> mids;
  if (g.empty()) return mids;
  mids.push_back(to_real(g.front()) / 2.0);
  for (std::size_t i = 0; i + 1 < g.size(); ++i)
    mids.push_back((to_real(g[i]) + to_real(g[i + 1])) / 2.0);
  mids.push_back(to_real(g.back()) * 1.5);
  return mids;
}

/// Metric-dimension witness (dimension beta on scale s): searches for an
/// unconnected family with centers in Q, radii < s drawn from the grid, and a
/// probe of multiplicity > beta.  Any violating family contains a violating
/// (beta+1)-subfamily, and shrinking each radius to the smallest grid value
/// covering the probe only helps unconnectedness, so the search over
/// (beta+1)-subsets with minimal grid radii is exhaustive.
template <MetricSpace S>
DimensionWitness<typename S::point_type, typename S::distance_type> metric_dim_witness(
    const S& space, const std::vector<typename S::point_type>& q,
    const std::vector<typename S::point_type>& probes, int beta,
    const typename S::distance_type& s, const std::vector<typename S::distance_type>& radius_grid,
    const WitnessOptions& opts = {}) {
  using P = typename S::point_type;
  using D = typename S::distance_type;
  if (beta < 1) throw std::invalid_argument("metric_dim_witness: beta >= 1 required");
  const std::size_t m = static_cast<std::size_t>(beta) + 1;
  DimensionWitness<P, D> w;
  if (q.size() < m || probes.empty()) return w;
  std::vector<D> grid = radius_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  unsigned long long subsets = detail::binomial_capped(q.size(), m, opts.budget);
  if (subsets > opts.budget || subsets * probes.size() > opts.budget)
    throw std::runtime_error("metric_dim_witness: combinatorial budget exceeded");

  // smallest grid radius >= d and < s, or none
  auto min_radius = [&](const D& d) -> std::optional<D> {
    auto it = std::lower_bound(grid.begin(), grid.end(), d);
    if (it == grid.end() || !(*it < s)) return std::nullopt;
    return *it;
  };

  std::vector<std::size_t> idx(m);
  for (std::size_t i = 0; i < m; ++i) idx[i] = i;
  do {
    for (std::size_t pi = 0; pi < probes.size(); ++pi) {
      ++w.tuples_searched;
      const P& a = probes[pi];
      std::vector<D> radii;
      bool ok = true;
      for (auto i : idx) {
        auto r = min_radius(space.distance(a, q[i]));
        if (!r) {
          ok = false;
          break;
        }
        radii.push_back(*r);
      }
      if (!ok) continue;
      for (std::size_t i = 0; ok && i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
          D dij = space.distance(q[idx[i]], q[idx[j]]);
          const D& rmax = radii[i] < radii[j] ? radii[j] : radii[i];
          if (!(rmax < dij)) {
            ok = false;
            break;
          }
        }
      if (ok) {
        w.verdict = DimVerdict::Violation;
        for (std::size_t i = 0; i < m; ++i) {
          w.point_indices.push_back(idx[i] + 1);
          w.points.push_back(q[idx[i]]);
          w.radii.push_back(radii[i]);
        }
        w.probe = a;
        w.probe_index = pi + 1;
        return w;
      }
    }
  } while (detail::next_combination(idx, q.size()));
  return w;
}

/// Empirical r_alpha: the smallest realized distance r with
/// #{i : rho(x_i, x) <= r} / n >= alpha -- the infimum of radii whose
/// empirical open ball carries mass alpha.
template <MetricSpace S>
typename S::distance_type r_alpha_empirical(const S& space,
                                            const std::vector<typename S::point_type>& pts,
                                            const typename S::point_type& x, double alpha) {
  using D = typename S::distance_type;
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("r_alpha_empirical: alpha must lie in (0,1]");
  if (pts.empty()) throw std::invalid_argument("r_alpha_empirical: empty sample");
  std::vector<D> ds(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) ds[i] = space.distance(pts[i], x);
  std::size_t need = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(pts.size())));
  if (need == 0) need = 1;
  std::nth_element(ds.begin(), ds.begin() + static_cast<std::ptrdiff_t>(need - 1), ds.end());
  return ds[need - 1];
}

}  // namespace nkl

#endif
