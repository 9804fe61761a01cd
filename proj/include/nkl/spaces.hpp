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

#ifndef NKL_SPACES_HPP
#define NKL_SPACES_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "nkl/metric_core.hpp"

namespace nkl {

// ---------------------------------------------------------------------------
// 0-1 space: n distinct points, all pairwise distances exactly 1.

struct ZeroOneSpace {
  using point_type = std::int32_t;
  using distance_type = std::int64_t;
  std::int32_t n = 0;

  std::int64_t distance(point_type a, point_type b) const {
    check_point(a);
    check_point(b);
    return a == b ? 0 : 1;
  }
  void check_point(point_type p) const {
    if (p < 0 || p >= n) throw std::out_of_range("ZeroOneSpace: point outside universe");
  }
};

inline std::pair<ZeroOneSpace, FiniteSample<std::int32_t>> build_zero_one(int n) {
  if (n < 1) throw std::invalid_argument("build_zero_one: n >= 1 required");
  ZeroOneSpace s{n};
  FiniteSample<std::int32_t> sample;
  sample.points.resize(n);
  for (int i = 0; i < n; ++i) sample.points[i] = i;
  return {s, sample};
}

// ---------------------------------------------------------------------------
// Harmonic space: points x_1..x_n with rho(x_i, x_j) = 1/i + 1/j, exact.

struct HarmonicSpace {
  using point_type = std::int32_t;  // 1-based index
  using distance_type = Rational;
  std::int32_t n = 0;

  Rational distance(point_type a, point_type b) const {
    check_point(a);
    check_point(b);
    if (a == b) return Rational(0);
    return Rational(1, a) + Rational(1, b);
  }
  void check_point(point_type p) const {
    if (p < 1 || p > n) throw std::out_of_range("HarmonicSpace: point outside universe");
  }
};

inline std::pair<HarmonicSpace, FiniteSample<std::int32_t>> build_harmonic(int n) {
  if (n < 1) throw std::invalid_argument("build_harmonic: n >= 1 required");
  HarmonicSpace s{n};
  FiniteSample<std::int32_t> sample;
  sample.points.resize(n);
  for (int i = 0; i < n; ++i) sample.points[i] = i + 1;
  return {s, sample};
}

// ---------------------------------------------------------------------------
// Powers-of-two ultrametric: x_j joins the chain at height 2^(j-2), so
// rho(x_i, x_j) = 2^(max(i,j)-2) for i != j.  (rho(x_1,x_2) = 1,
// rho(., x_3) = 2, ...)

struct PowersOfTwoSpace {
  using point_type = std::int32_t;  // 1-based index
  using distance_type = Dyadic;
  std::int32_t n = 0;

  Dyadic distance(point_type a, point_type b) const {
    check_point(a);
    check_point(b);
    if (a == b) return Dyadic::zero();
    return Dyadic::pow2(std::max(a, b) - 2);
  }
  void check_point(point_type p) const {
    if (p < 1 || p > n) throw std::out_of_range("PowersOfTwoSpace: point outside universe");
  }
};

inline std::pair<PowersOfTwoSpace, FiniteSample<std::int32_t>> build_powers_of_two(int n) {
  if (n < 2) throw std::invalid_argument("build_powers_of_two: n >= 2 required");
  PowersOfTwoSpace s{n};
  FiniteSample<std::int32_t> sample;
  sample.points.resize(n);
  for (int i = 0; i < n; ++i) sample.points[i] = i + 1;
  return {s, sample};
}

// ---------------------------------------------------------------------------
// Modified reals: rho = 0 iff equal, 1/2 if exactly one of the pair is 0,
// else 1.  Points are exact rationals so zero tests are exact.

struct ModifiedRealsSpace {
  using point_type = Rational;
  using distance_type = Dyadic;

  Dyadic distance(const Rational& a, const Rational& b) const {
    if (a == b) return Dyadic::zero();
    if (a.is_zero() || b.is_zero()) return Dyadic::pow2(-1);
    return Dyadic::one();
  }
};

inline ModifiedRealsSpace build_modified_reals() { return {}; }

// ---------------------------------------------------------------------------
// Euclidean test spaces (inexact mode, tolerance 0; ties have probability 0).

struct IntervalSpace {
  using point_type = double;
  using distance_type = double;
  double distance(double a, double b) const { return std::fabs(a - b); }
};

struct PlaneSpace {
  using point_type = std::array<double, 2>;
  using distance_type = double;
  double distance(const point_type& a, const point_type& b) const {
    double dx = a[0] - b[0], dy = a[1] - b[1];
    return std::sqrt(dx * dx + dy * dy);
  }
};

/// Marginal nu = uniform[0,1] plus a regression function eta.  The labeled
/// pair law is X ~ nu, Y ~ Bernoulli(eta(X)).
struct IntervalDistribution {
  enum class Eta { Linear, Constant };
  Eta kind = Eta::Linear;
  double c = 0.0;

  IntervalSpace space() const { return {}; }
  double sample(Rng& rng) const { return rng.unit(); }
  double eta(double x) const { return kind == Eta::Linear ? x : c; }
  /// closed form of E[min(eta, 1-eta)]
  double bayes_error() const {
    if (kind == Eta::Linear) return 0.25;
    return std::min(c, 1.0 - c);
  }
  std::string name() const {
    return kind == Eta::Linear ? "interval-linear" : "interval-constant";
  }
};

inline IntervalDistribution build_interval_distribution_linear() {
  return IntervalDistribution{IntervalDistribution::Eta::Linear, 0.0};
}
inline IntervalDistribution build_interval_distribution_constant(double c) {
  if (c < 0.0 || c > 1.0) throw std::invalid_argument("eta constant must lie in [0,1]");
  return IntervalDistribution{IntervalDistribution::Eta::Constant, c};
}

// ---------------------------------------------------------------------------
// Random dendrograms (finite ultrametric samples).  Distances are the merge
// heights, stored as a full matrix of int64 values; distinct nodes get
// distinct heights so the only ties are the structural ones.

struct DendrogramSpace {
  using point_type = std::int32_t;
  using distance_type = std::int64_t;
  std::int32_t n = 0;
  std::vector<std::int64_t> d;  // n*n matrix

  std::int64_t distance(point_type a, point_type b) const {
    if (a < 0 || a >= n || b < 0 || b >= n)
      throw std::out_of_range("DendrogramSpace: point outside universe");
    return d[static_cast<std::size_t>(a) * n + b];
  }
};

namespace detail {
inline void merge_clusters(DendrogramSpace& s, std::vector<std::vector<std::int32_t>>& cl,
                           std::size_t i, std::size_t j, std::int64_t h) {
  for (auto a : cl[i])
    for (auto b : cl[j]) {
      s.d[static_cast<std::size_t>(a) * s.n + b] = h;
      s.d[static_cast<std::size_t>(b) * s.n + a] = h;
    }
  cl[i].insert(cl[i].end(), cl[j].begin(), cl[j].end());
  cl.erase(cl.begin() + static_cast<std::ptrdiff_t>(j));
}
}  // namespace detail

/// Fully random dendrogram on n points: random merge order, strictly
/// increasing heights.  Structural distance ties are intrinsic here.
inline std::pair<DendrogramSpace, FiniteSample<std::int32_t>> make_random_dendrogram(int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("make_random_dendrogram: n >= 1 required");
  DendrogramSpace s;
  s.n = n;
  s.d.assign(static_cast<std::size_t>(n) * n, 0);
  std::vector<std::vector<std::int32_t>> cl(n);
  for (int i = 0; i < n; ++i) cl[i] = {i};
  std::int64_t h = 0;
  while (cl.size() > 1) {
    std::size_t i = rng.below(cl.size());
    std::size_t j = rng.below(cl.size() - 1);
    if (j >= i) ++j;
    if (i > j) std::swap(i, j);
    h += 1 + static_cast<std::int64_t>(rng.below(4));
    detail::merge_clusters(s, cl, i, j, h);
  }
  FiniteSample<std::int32_t> sample;
  sample.points.resize(n);
  for (int i = 0; i < n; ++i) sample.points[i] = i;
  return {s, sample};
}

/// Random ultrametric sample whose k-nearest neighbor sets are unambiguous:
/// points come in cells of exactly k+1 (each cell its own merge height), so
/// every query's closed ball at eps_kNN holds exactly k+1 points.  This is
/// the "no distance ties" hypothesis of the degree bound in operational form;
/// cells of other sizes would put a tie on the k-th boundary.
inline std::pair<DendrogramSpace, FiniteSample<std::int32_t>> make_tie_free_ultrametric(
    int cells, int k, Rng& rng) {
  if (cells < 1 || k < 1) throw std::invalid_argument("make_tie_free_ultrametric: cells,k >= 1");
  const int cell_size = k + 1;
  const int n = cells * cell_size;
  DendrogramSpace s;
  s.n = n;
  s.d.assign(static_cast<std::size_t>(n) * n, 0);
  std::vector<std::int32_t> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  rng.shuffle(perm);
  std::vector<std::vector<std::int32_t>> cl;
  std::int64_t h = 0;
  for (int c = 0; c < cells; ++c) {
    std::vector<std::int32_t> cell(perm.begin() + static_cast<std::ptrdiff_t>(c) * cell_size,
                                   perm.begin() + static_cast<std::ptrdiff_t>(c + 1) * cell_size);
    h += 1 + static_cast<std::int64_t>(rng.below(4));
    for (std::size_t a = 0; a < cell.size(); ++a)
      for (std::size_t b = a + 1; b < cell.size(); ++b) {
        s.d[static_cast<std::size_t>(cell[a]) * n + cell[b]] = h;
        s.d[static_cast<std::size_t>(cell[b]) * n + cell[a]] = h;
      }
    cl.push_back(std::move(cell));
  }
  while (cl.size() > 1) {
    std::size_t i = rng.below(cl.size());
    std::size_t j = rng.below(cl.size() - 1);
    if (j >= i) ++j;
    if (i > j) std::swap(i, j);
    h += 1 + static_cast<std::int64_t>(rng.below(4));
    detail::merge_clusters(s, cl, i, j, h);
  }
  FiniteSample<std::int32_t> sample;
  sample.points.resize(n);
  for (int i = 0; i < n; ++i) sample.points[i] = i;
  return {s, sample};
}

// ---------------------------------------------------------------------------
// Cantor product space with per-level alphabet sizes chosen so that distance
// ties at every level occur with probability >= 1 - delta.

struct CantorLevel {
  std::int64_t alphabet = 0;    // N_k
  std::int64_t sample_size = 0; // n_k
  Rational delta_k;
};

struct CantorSchedule {
  Rational delta;
  int depth = 0;  // K
  std::vector<CantorLevel> levels;
};

namespace detail {

/// Exact birthday check: prod_{i=1}^{n-1} (1 - i/N) >= 1 - delta.
inline bool birthday_ok(std::int64_t N, std::int64_t n, const Rational& delta) {
  if (n <= 1) return true;
  if (n > N) return false;
  BigInt prod(1);
  for (std::int64_t i = 1; i < n; ++i) prod = prod * BigInt(N - i);
  BigInt npow = BigInt::pow(BigInt(N), static_cast<unsigned long long>(n - 1));
  // q*prod >= (q - p)*N^(n-1)  with delta = p/q
  return delta.den() * prod >= (delta.den() - delta.num()) * npow;
}

/// Exact coverage check via union bound:
///   N * P(Bin(n, 1/N) <= t-1) <= delta.
inline bool coverage_ok(std::int64_t N, std::int64_t t, std::int64_t n, const Rational& delta) {
  if (n < N * t) return false;  // cannot cover every symbol t times
  // tail = sum_{j=0}^{t-1} C(n,j) (N-1)^(n-j)  over N^n
  BigInt tail(0);
  BigInt binom(1);  // C(n, j)
  BigInt nm1 = BigInt(N - 1);
  std::vector<BigInt> pw(static_cast<std::size_t>(t));
  // (N-1)^(n-j) for j = 0..t-1
  BigInt p = BigInt::pow(nm1, static_cast<unsigned long long>(n - (t - 1)));
  for (std::int64_t j = t - 1; j >= 0; --j) {
    pw[static_cast<std::size_t>(j)] = p;
    if (j > 0) p = p * nm1;
  }
  for (std::int64_t j = 0; j < t; ++j) {
    tail = tail + binom * pw[static_cast<std::size_t>(j)];
    binom = binom * BigInt(n - j) / BigInt(j + 1);
  }
  BigInt npow = BigInt::pow(BigInt(N), static_cast<unsigned long long>(n));
  // q*N*tail <= p*N^n
  return delta.den() * BigInt(N) * tail <= delta.num() * npow;
}

inline std::int64_t minimal_birthday_alphabet(std::int64_t n, const Rational& delta,
                                              std::int64_t cap) {
  std::int64_t lo = n, hi = n;
  while (!birthday_ok(hi, n, delta)) {
    if (hi > cap) return cap + 1;
    lo = hi + 1;
    hi *= 2;
  }
  while (lo < hi) {
    std::int64_t mid = lo + (hi - lo) / 2;
    if (birthday_ok(mid, n, delta)) hi = mid;
    else lo = mid + 1;
  }
  return lo;
}

inline std::int64_t minimal_coverage_draws(std::int64_t N, std::int64_t t, const Rational& delta,
                                           std::int64_t cap) {
  std::int64_t lo = N * t, hi = N * t;
  if (lo > cap) return cap + 1;
  // keep the exact tail evaluations within a sane bigint budget
  if (static_cast<double>(lo) * std::log2(static_cast<double>(N)) > 5e6)
    throw std::runtime_error("build_cantor_schedule: K too deep for the size cap (exact tails)");
  while (!coverage_ok(N, t, hi, delta)) {
    if (hi > cap) return cap + 1;
    lo = hi + 1;
    hi *= 2;
  }
  while (lo < hi) {
    std::int64_t mid = lo + (hi - lo) / 2;
    if (coverage_ok(N, t, mid, delta)) hi = mid;
    else lo = mid + 1;
  }
  return lo;
}

/// Cheap necessary bound: all-distinct w.p. >= 1-delta forces
/// N >= n(n-1) / (2 ln(1/(1-delta))); used only to reject hopeless depths
/// before any exact search.
inline double birthday_alphabet_lower_bound(double n, double delta) {
  return n * (n - 1.0) / (2.0 * -std::log1p(-delta));
}

}  // namespace detail

/// Builds the minimal (N_k, n_k) schedule:
///   (a) n_k uniform draws from [N_k] are pairwise distinct w.p. >= 1-delta_k
///       (exact collision product), and
///   (b) n_{k+1} uniform draws from [N_k] hit every symbol >= n_k times
///       w.p. >= 1-delta_k (exact binomial tails, union bound).
/// Per-level budgets delta_k = delta / 2^(k+1), so sum of 2*delta_k < delta.
inline CantorSchedule build_cantor_schedule(const Rational& delta, int K, std::int64_t n1 = 2,
                                            std::int64_t size_cap = 1000000000) {
  if (!(Rational(0) < delta && delta < Rational(1)))
    throw std::invalid_argument("build_cantor_schedule: delta in (0,1) required");
  if (K < 1) throw std::invalid_argument("build_cantor_schedule: K >= 1 required");
  if (n1 < 2) throw std::invalid_argument("build_cantor_schedule: n1 >= 2 required");
  CantorSchedule sch;
  sch.delta = delta;
  sch.depth = K;
  Rational dk = delta;
  std::int64_t nk = n1;
  for (int k = 1; k <= K; ++k) {
    dk = dk / Rational(2);
    Rational delta_k = dk / Rational(2);  // delta / 2^(k+1)
    if (nk > size_cap)
      throw std::runtime_error("build_cantor_schedule: K too deep for the size cap (n_k)");
    std::int64_t Nk = detail::minimal_birthday_alphabet(nk, delta_k, size_cap);
    if (Nk > size_cap)
      throw std::runtime_error("build_cantor_schedule: K too deep for the size cap (N_k)");
    sch.levels.push_back(CantorLevel{Nk, nk, delta_k});
    if (k < K) {
      // n_{k+1} >= N_k * n_k deterministically; if even that lower bound
      // forces the next alphabet past the cap, fail before any exact search
      double n_lower = static_cast<double>(Nk) * static_cast<double>(nk);
      double next_delta = (dk / Rational(4)).to_double();
      if (n_lower > static_cast<double>(size_cap) ||
          detail::birthday_alphabet_lower_bound(n_lower, next_delta) >
              static_cast<double>(size_cap))
        throw std::runtime_error("build_cantor_schedule: K too deep for the size cap");
      nk = detail::minimal_coverage_draws(Nk, nk, delta_k, size_cap);
      if (nk > size_cap)
        throw std::runtime_error("build_cantor_schedule: K too deep for the size cap (n_k)");
    }
  }
  return sch;
}

/// Point of the product space prod_k [N_k], coordinates reproducible from the
/// seed and memoized on demand; prefix only grows.
class LazyProductPoint {
public:
  LazyProductPoint() = default;
  LazyProductPoint(std::uint64_t seed, const CantorSchedule* sch) : seed_(seed), sch_(sch) {}

  std::uint64_t seed() const { return seed_; }

  /// 1-based coordinate in [N_i].
  std::int64_t coordinate(int i) const {
    materialize(i);
    return coords_[static_cast<std::size_t>(i - 1)];
  }

  void materialize(int depth) const {
    while (static_cast<int>(coords_.size()) < depth) {
      int level = static_cast<int>(coords_.size());  // 0-based level being filled
      if (level >= sch_->depth)
        throw std::out_of_range("LazyProductPoint: coordinate beyond schedule depth");
      Rng r(derive_seed(seed_, static_cast<std::uint64_t>(level)));
      coords_.push_back(1 + static_cast<std::int64_t>(
                                r.below(static_cast<std::uint64_t>(sch_->levels[level].alphabet))));
    }
  }

private:
  std::uint64_t seed_ = 0;
  const CantorSchedule* sch_ = nullptr;
  mutable std::vector<std::int64_t> coords_;
};

struct CantorDistance {
  Dyadic value;
  bool capped = false;  // identical through depth K
};

/// Metric 2^(-min{i : sigma_i != tau_i}); pairs identical through depth K are
/// flagged and valued 2^(-K) so truncation never manufactures distance zero.
struct CantorSpace {
  using point_type = LazyProductPoint;
  using distance_type = Dyadic;
  CantorSchedule schedule;

  CantorDistance distance_flagged(const LazyProductPoint& a, const LazyProductPoint& b) const {
    if (a.seed() == b.seed()) return {Dyadic::zero(), false};
    for (int i = 1; i <= schedule.depth; ++i) {
      if (a.coordinate(i) != b.coordinate(i)) return {Dyadic::pow2(-i), false};
    }
    return {Dyadic::pow2(-schedule.depth), true};
  }
  Dyadic distance(const LazyProductPoint& a, const LazyProductPoint& b) const {
    return distance_flagged(a, b).value;
  }
};

/// Fresh point with coordinates i.i.d. uniform on [N_i], materialized to the
/// schedule depth so it can be shared across workers.
inline LazyProductPoint cantor_sample(const CantorSpace& space, Rng& rng) {
  LazyProductPoint p(rng.next_u64(), &space.schedule);
  p.materialize(space.schedule.depth);
  return p;
}

}  // namespace nkl

#endif
