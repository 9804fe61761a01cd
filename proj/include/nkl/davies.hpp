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

#ifndef NKL_DAVIES_HPP
#define NKL_DAVIES_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "nkl/metric_core.hpp"

namespace nkl {

// Davies' compact space: the product of graph levels M_n whose vertices are
// pairs (i1, i2), 1 <= i1 <= p_n, 0 <= i2 <= p_n.  (i1, 0) is central; a
// peripheral (i1, j) is joined only to its central (i1, 0); centrals are all
// joined to each other.  Two measures mu_a, mu_b built from the (alpha_n,
// beta_n) chain agree on every closed ball of radius < 1 yet differ globally.

struct DaviesLevel {
  std::int64_t p = 0;
  Rational alpha, beta;
};

struct DaviesParams {
  int depth = 0;  // L
  std::vector<DaviesLevel> levels;

  const DaviesLevel& level(int t) const { return levels.at(static_cast<std::size_t>(t - 1)); }
};

/// Solves the chain exactly: alpha_0 = 2/3, beta_0 = 1/3,
///   p_n^2 alpha_n + p_n beta_n = alpha_{n-1},
///   p_n^2 beta_n  + p_n alpha_n = beta_{n-1},
/// with p_n the minimal integer > alpha_{n-1}/beta_{n-1}.  Sum and difference
/// decouple:  alpha_n + beta_n = S/(p(p+1)),  alpha_n - beta_n = D/(p(p-1)).
inline DaviesParams davies_params(int L) {
  if (L < 1) throw std::invalid_argument("davies_params: L >= 1 required");
  DaviesParams params;
  params.depth = L;
  Rational alpha(2, 3), beta(1, 3);
  for (int n = 1; n <= L; ++n) {
    Rational ratio = alpha / beta;
    BigInt pfloor = ratio.floor();
    std::int64_t p = static_cast<std::int64_t>(pfloor.to_u64()) + 1;
    Rational sum = (alpha + beta) / Rational(p * (p + 1));
    Rational diff = (alpha - beta) / Rational(p * (p - 1));
    Rational a = (sum + diff) / Rational(2);
    Rational b = (sum - diff) / Rational(2);
    if (!(a > b && b > Rational(0)))
      throw std::logic_error("davies_params: chain positivity violated");
    // recursion identities, exact
    Rational pr(p);
    if (pr * pr * a + pr * b != alpha || pr * pr * b + pr * a != beta)
      throw std::logic_error("davies_params: recursion identity violated");
    params.levels.push_back(DaviesLevel{p, a, b});
    alpha = a;
    beta = b;
  }
  return params;
}

/// Coordinate (i1, i2) at one level; central iff i2 == 0.
struct DaviesCoord {
  std::int32_t i1 = 1;
  std::int32_t i2 = 0;
  bool central() const { return i2 == 0; }
  friend bool operator==(const DaviesCoord& a, const DaviesCoord& b) {
    return a.i1 == b.i1 && a.i2 == b.i2;
  }
};

using DaviesPoint = std::vector<DaviesCoord>;  // length = depth L

/// Edge of the level graph G_n.
inline bool davies_edge(const DaviesCoord& x, const DaviesCoord& y) {
  if (x.central() && y.central()) return true;
  if (x.central() != y.central()) {
    const DaviesCoord& periph = x.central() ? y : x;
    const DaviesCoord& cent = x.central() ? x : y;
    return periph.i1 == cent.i1;
  }
  return false;
}

struct DaviesDistance {
  Dyadic value;
  bool truncated = false;  // equal through depth L
};

struct DaviesSpace {
  using point_type = DaviesPoint;
  using distance_type = Dyadic;
  DaviesParams params;

  /// Metric on the depth-L truncation: 0 iff all coordinates equal, else with
  /// m the first differing level, 2^-m on an edge and 2^-(m-1) otherwise.
  Dyadic distance(const DaviesPoint& x, const DaviesPoint& y) const {
    return distance_truncated(x, y).value;
  }

  /// Sampling convention: two draws equal through depth L are flagged and
  /// treated as distance 2^-L (their true distance is merely < 2^-L).
  DaviesDistance distance_truncated(const DaviesPoint& x, const DaviesPoint& y) const {
    if (x.size() != y.size() || static_cast<int>(x.size()) != params.depth)
      throw std::invalid_argument("davies distance: depth mismatch");
    for (int m = 1; m <= params.depth; ++m) {
      const DaviesCoord& a = x[static_cast<std::size_t>(m - 1)];
      const DaviesCoord& b = y[static_cast<std::size_t>(m - 1)];
      if (!(a == b)) return {davies_edge(a, b) ? Dyadic::pow2(-m) : Dyadic::pow2(-(m - 1)), false};
    }
    return {Dyadic::zero(), false};
  }
  DaviesDistance distance_flagged(const DaviesPoint& x, const DaviesPoint& y) const {
    DaviesDistance d = distance_truncated(x, y);
    if (!d.value.positive) return {Dyadic::pow2(-params.depth), true};
    return d;
  }
};

/// Wrapper space that applies the flagged-collision convention, used by the
/// sampling experiments (collision probability is bounded by the maximum
/// cylinder mass and reported).
struct DaviesSampledSpace {
  using point_type = DaviesPoint;
  using distance_type = Dyadic;
  const DaviesSpace* base = nullptr;
  Dyadic distance(const DaviesPoint& x, const DaviesPoint& y) const {
    return base->distance_flagged(x, y).value;
  }
};

enum class DaviesMeasure { MuA, MuB, Mu0, Mu1, Mu };

/// Cylinder mass of Omega[x_1..x_t] under mu_a / mu_b: beta_t when the count
/// of central coordinates is even (alpha_t when odd) for mu_a, flipped for
/// mu_b.
inline Rational davies_cylinder_mass(const DaviesParams& params, bool mu_b, int t,
                                     bool odd_centrals) {
  Rational a = t == 0 ? Rational(2, 3) : params.level(t).alpha;
  Rational b = t == 0 ? Rational(1, 3) : params.level(t).beta;
  bool use_alpha = mu_b ? !odd_centrals : odd_centrals;
  return use_alpha ? a : b;
}

inline Rational davies_total_mass(DaviesMeasure which) {
  switch (which) {
    case DaviesMeasure::MuA: return Rational(1, 3);
    case DaviesMeasure::MuB: return Rational(2, 3);
    case DaviesMeasure::Mu0: return Rational(2, 5);
    case DaviesMeasure::Mu1: return Rational(3, 5);
    case DaviesMeasure::Mu: return Rational(1);
  }
  throw std::logic_error("unreachable");
}

/// Exact measure of the closed ball B(x, r), r = 2^-t (1 <= t <= L) or r = 1.
/// Computed by enumerating the level-t cylinders the ball consists of, so the
/// equal-ball identity mu_a = mu_b is a genuine check, not a restatement.
inline Rational davies_ball_measure(const DaviesParams& params, const DaviesPoint& x,
                                    const Dyadic& r, DaviesMeasure which) {
  if (r == Dyadic::one()) return davies_total_mass(which);
  if (!r.positive || r.exp >= 0 || -r.exp > params.depth)
    throw std::invalid_argument("davies_ball_measure: radius not on the dyadic grid 2^-t, t <= L");
  int t = -r.exp;
  if (static_cast<int>(x.size()) != params.depth)
    throw std::invalid_argument("davies_ball_measure: point depth mismatch");
  if (which == DaviesMeasure::Mu0)
    return Rational(6, 5) * davies_ball_measure(params, x, r, DaviesMeasure::MuA);
  if (which == DaviesMeasure::Mu1)
    return Rational(9, 10) * davies_ball_measure(params, x, r, DaviesMeasure::MuB);
  if (which == DaviesMeasure::Mu)
    return davies_ball_measure(params, x, r, DaviesMeasure::Mu0) +
           davies_ball_measure(params, x, r, DaviesMeasure::Mu1);

  bool mu_b = which == DaviesMeasure::MuB;
  int centrals_prefix = 0;
  for (int i = 1; i < t; ++i)
    if (x[static_cast<std::size_t>(i - 1)].central()) ++centrals_prefix;
  const DaviesCoord xt = x[static_cast<std::size_t>(t - 1)];
  const std::int64_t p = params.level(t).p;

  // y_t ranges over x_t itself plus its graph neighbors
  std::vector<DaviesCoord> extensions;
  if (xt.central()) {
    for (std::int64_t j = 1; j <= p; ++j)
      extensions.push_back(DaviesCoord{static_cast<std::int32_t>(j), 0});
    for (std::int64_t j = 1; j <= p; ++j)
      extensions.push_back(DaviesCoord{xt.i1, static_cast<std::int32_t>(j)});
  } else {
    extensions.push_back(xt);
    extensions.push_back(DaviesCoord{xt.i1, 0});
  }
  Rational total(0);
  for (const auto& y : extensions) {
    bool odd = ((centrals_prefix + (y.central() ? 1 : 0)) % 2) == 1;
    total = total + davies_cylinder_mass(params, mu_b, t, odd);
  }
  return total;
}

/// Level-by-level sampler.  Class probabilities are exact rationals reduced
/// to u64 numerator/denominator; the index within the class is uniform.
class DaviesSampler {
public:
  explicit DaviesSampler(const DaviesParams& params) : params_(&params) {
    int L = params.depth;
    tables_.resize(static_cast<std::size_t>(L));
    for (int t = 1; t <= L; ++t) {
      for (int mb = 0; mb < 2; ++mb) {
        for (int odd = 0; odd < 2; ++odd) {
          Rational prefix_mass = davies_cylinder_mass(*params_, mb == 1, t - 1, odd == 1);
          Rational central_mass = Rational(params.level(t).p) *
                                  davies_cylinder_mass(*params_, mb == 1, t, odd == 0);
          Rational pc = central_mass / prefix_mass;
          if (!(pc >= Rational(0) && pc <= Rational(1)))
            throw std::logic_error("DaviesSampler: class probability outside [0,1]");
          if (!pc.num().fits_u64() || !pc.den().fits_u64())
            throw std::overflow_error("DaviesSampler: depth too large for u64 class draws");
          tables_[static_cast<std::size_t>(t - 1)].central_num[mb][odd] = pc.num().to_u64();
          tables_[static_cast<std::size_t>(t - 1)].central_den[mb][odd] = pc.den().to_u64();
        }
      }
    }
  }

  /// Exact central-class probability at level t given the prefix parity.
  Rational central_prob(bool mu_b, int t, bool odd_prefix) const {
    Rational prefix_mass = davies_cylinder_mass(*params_, mu_b, t - 1, odd_prefix);
    Rational central_mass =
        Rational(params_->level(t).p) * davies_cylinder_mass(*params_, mu_b, t, !odd_prefix);
    return central_mass / prefix_mass;
  }
  Rational peripheral_prob(bool mu_b, int t, bool odd_prefix) const {
    Rational prefix_mass = davies_cylinder_mass(*params_, mu_b, t - 1, odd_prefix);
    std::int64_t p = params_->level(t).p;
    Rational periph_mass =
        Rational(p * p) * davies_cylinder_mass(*params_, mu_b, t, odd_prefix);
    return periph_mass / prefix_mass;
  }

  DaviesPoint sample_point(bool mu_b, Rng& rng) const {
    DaviesPoint pt;
    pt.reserve(static_cast<std::size_t>(params_->depth));
    bool odd = false;
    for (int t = 1; t <= params_->depth; ++t) {
      const auto& tab = tables_[static_cast<std::size_t>(t - 1)];
      std::int64_t p = params_->level(t).p;
      bool central = rng.bernoulli_u64(tab.central_num[mu_b ? 1 : 0][odd ? 1 : 0],
                                       tab.central_den[mu_b ? 1 : 0][odd ? 1 : 0]);
      DaviesCoord c;
      c.i1 = static_cast<std::int32_t>(1 + rng.below(static_cast<std::uint64_t>(p)));
      c.i2 = central ? 0 : static_cast<std::int32_t>(1 + rng.below(static_cast<std::uint64_t>(p)));
      if (central) odd = !odd;
      pt.push_back(c);
    }
    return pt;
  }

  /// One labeled pair: Y = 1 w.p. exactly 3/5, X | Y=1 ~ mu_b (normalized),
  /// X | Y=0 ~ mu_a (normalized).
  std::pair<DaviesPoint, std::uint8_t> sample_labeled_pair(Rng& rng) const {
    std::uint8_t y = rng.bernoulli_u64(3, 5) ? 1 : 0;
    return {sample_point(y == 1, rng), y};
  }

private:
  struct LevelTable {
    std::uint64_t central_num[2][2];
    std::uint64_t central_den[2][2];
  };
  const DaviesParams* params_;
  std::vector<LevelTable> tables_;
};

inline FiniteSample<DaviesPoint> davies_sample_labeled(const DaviesSampler& sampler, int n,
                                                       Rng& rng) {
  if (n < 1) throw std::invalid_argument("davies_sample_labeled: n >= 1 required");
  FiniteSample<DaviesPoint> out;
  out.points.reserve(static_cast<std::size_t>(n));
  out.labels.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto [x, y] = sampler.sample_labeled_pair(rng);
    out.points.push_back(std::move(x));
    out.labels.push_back(y);
  }
  return out;
}

/// Exact P(Binomial(k, 3/7) >= ceil(k/2)): the probability that a majority of
/// k neighbor labels drawn in the tie regime votes 1.
inline Rational davies_majority_prob(int k) {
  if (k < 1) throw std::invalid_argument("davies_majority_prob: k >= 1 required");
  int m = (k + 1) / 2;
  BigInt num(0);
  BigInt binom(1);  // C(k, j)
  // sum_{j=m..k} C(k,j) 3^j 4^(k-j)
  std::vector<BigInt> pow3(static_cast<std::size_t>(k + 1)), pow4(static_cast<std::size_t>(k + 1));
  pow3[0] = BigInt(1);
  pow4[0] = BigInt(1);
  for (int i = 1; i <= k; ++i) {
    pow3[static_cast<std::size_t>(i)] = pow3[static_cast<std::size_t>(i - 1)] * BigInt(3);
    pow4[static_cast<std::size_t>(i)] = pow4[static_cast<std::size_t>(i - 1)] * BigInt(4);
  }
  for (int j = 0; j <= k; ++j) {
    if (j >= m)
      num = num + binom * pow3[static_cast<std::size_t>(j)] * pow4[static_cast<std::size_t>(k - j)];
    binom = binom * BigInt(k - j) / BigInt(j + 1);
  }
  return Rational(num, BigInt::pow(BigInt(7), static_cast<unsigned long long>(k)));
}

/// Exact asymptotic error of the k-NN rule in the tie regime:
/// 0.4 p + 0.6 (1 - p) with p = davies_majority_prob(k).
inline Rational davies_oracle_error(int k) {
  Rational p = davies_majority_prob(k);
  return Rational(2, 5) * p + Rational(3, 5) * (Rational(1) - p);
}

}  // namespace nkl

#endif
