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

#include "doctest.h"

#include "nkl/dimension.hpp"
#include "nkl/spaces.hpp"

using namespace nkl;

TEST_CASE("is_unconnected") {
  IntervalSpace line;
  BallFamily<double, double> fam{{0.0, 1.1}, {1.3, 1.0}};
  CHECK(is_unconnected(line, fam));  // 1.3 > max(1.1, 1.0)
  BallFamily<double, double> overlapping{{0.0, 1.0}, {0.5, 0.2}};
  CHECK(!is_unconnected(line, overlapping));  // 0.5 inside the first ball
  BallFamily<double, double> single{{2.0, 5.0}};
  CHECK(is_unconnected(line, single));
  CHECK_THROWS(is_unconnected(line, BallFamily<double, double>{}));
}

TEST_CASE("multiplicity") {
  IntervalSpace line;
  BallFamily<double, double> fam{{0.0, 0.5}, {2.0, 0.5}, {4.0, 0.5}};
  CHECK(multiplicity(line, 10.0, fam) == 0);
  CHECK(multiplicity(line, 0.3, fam) == 1);

  // random unconnected families on the line have multiplicity <= 2 anywhere
  Rng rng(3);
  for (int t = 0; t < 500; ++t) {
    BallFamily<double, double> f;
    int m = 2 + static_cast<int>(rng.below(6));
    for (int i = 0; i < m; ++i) f.push_back({10.0 * rng.unit(), rng.unit()});
    if (!is_unconnected(line, f)) continue;
    for (int probe = 0; probe < 20; ++probe)
      CHECK(multiplicity(line, 10.0 * rng.unit(), f) <= 2);
  }

  // 0-1 space: unconnected families have multiplicity <= 1
  auto [zo, zs] = build_zero_one(8);
  BallFamily<std::int32_t, std::int64_t> zf;
  for (int i = 0; i < 4; ++i) zf.push_back({i, 0});
  CHECK(is_unconnected(zo, zf));
  for (int p = 0; p < 8; ++p) CHECK(multiplicity(zo, p, zf) <= 1);
}

TEST_CASE("extract_cover_subfamily") {
  IntervalSpace line;
  BallFamily<double, double> single{{1.0, 2.0}};
  auto ex1 = extract_cover_subfamily(line, single);
  CHECK(ex1.subfamily.size() == 1);

  // hand-traced greedy rounds
  BallFamily<double, double> fam{{0.0, 1.0}, {0.5, 0.2}, {2.0, 0.5}};
  auto ex = extract_cover_subfamily(line, fam);
  REQUIRE(ex.rounds.size() >= 1);
  CHECK(ex.rounds[0] == std::vector<std::size_t>{0, 2});
  CHECK(ex.subfamily.size() == 2);
  CHECK(ex.subfamily[0].center == 0.0);
  CHECK(ex.subfamily[1].center == 2.0);

  // unconnected input comes back whole in round 1
  BallFamily<double, double> un{{0.0, 0.4}, {1.0, 0.4}, {2.0, 0.4}};
  auto ex2 = extract_cover_subfamily(line, un);
  CHECK(ex2.rounds.size() == 1);
  CHECK(ex2.subfamily.size() == 3);
}

TEST_CASE("extract_cover_subfamily properties on random families") {
  IntervalSpace line;
  Rng rng(17);
  for (int t = 0; t < 300; ++t) {
    BallFamily<double, double> fam;
    int m = 1 + static_cast<int>(rng.below(12));
    for (int i = 0; i < m; ++i) fam.push_back({4.0 * rng.unit(), 0.7 * rng.unit()});
    auto ex = extract_cover_subfamily(line, fam);
    // every input center covered by some extracted ball
    for (const auto& b : fam) {
      bool covered = false;
      for (const auto& e : ex.subfamily)
        if (line.distance(b.center, e.center) <= e.radius) covered = true;
      CHECK(covered);
    }
    // each round is unconnected, and multiplicity within a round <= d+1 = 2
    for (const auto& round : ex.rounds) {
      if (round.empty()) continue;
      BallFamily<double, double> rf;
      for (auto i : round) rf.push_back(fam[i]);
      CHECK(is_unconnected(line, rf));
      for (int probe = 0; probe < 10; ++probe)
        CHECK(multiplicity(line, 4.0 * rng.unit(), rf) <= 2);
    }
  }
  // ultrametric: round multiplicity <= d+1 = 1
  Rng rng2(19);
  auto [ds, dsam] = make_random_dendrogram(25, rng2);
  for (int t = 0; t < 100; ++t) {
    BallFamily<std::int32_t, std::int64_t> fam;
    int m = 1 + static_cast<int>(rng2.below(10));
    for (int i = 0; i < m; ++i)
      fam.push_back({static_cast<std::int32_t>(rng2.below(25)),
                     static_cast<std::int64_t>(rng2.below(60))});
    auto ex = extract_cover_subfamily(ds, fam);
    for (const auto& round : ex.rounds) {
      if (round.empty()) continue;
      BallFamily<std::int32_t, std::int64_t> rf;
      for (auto i : round) rf.push_back(fam[i]);
      for (int probe = 0; probe < 25; ++probe)
        CHECK(multiplicity(ds, static_cast<std::int32_t>(probe), rf) <= 1);
    }
  }
}

TEST_CASE("nagata_dim_witness") {
  // ultrametric spaces: dimension zero, no violation
  auto [pt, ps] = build_powers_of_two(10);
  auto w = nagata_dim_witness(pt, ps.points, ps.points, 0);
  CHECK(w.verdict == DimVerdict::ConsistentWithDim);
  auto [zo, zs] = build_zero_one(10);
  CHECK(nagata_dim_witness(zo, zs.points, zs.points, 0).verdict ==
        DimVerdict::ConsistentWithDim);

  // reals with the usual metric: dimension one, no violation on random data
  IntervalSpace line;
  Rng rng(31);
  std::vector<double> q(12), probes(15);
  for (auto& v : q) v = rng.unit();
  for (auto& v : probes) v = rng.unit();
  auto w1 = nagata_dim_witness(line, q, probes, 1);
  CHECK(w1.verdict == DimVerdict::ConsistentWithDim);

  // modified reals: Q = {3^-1, ..., 3^-(d+2)}, probe 0 violates every d
  ModifiedRealsSpace mr;
  for (int d = 0; d <= 3; ++d) {
    std::vector<Rational> qq;
    Rational v(1, 3);
    for (int i = 0; i < d + 2; ++i) {
      qq.push_back(v);
      v = v / Rational(3);
    }
    std::vector<Rational> pr{Rational(0)};
    auto wv = nagata_dim_witness(mr, qq, pr, d);
    REQUIRE(wv.verdict == DimVerdict::Violation);
    CHECK(verify_nagata_violation(mr, wv));  // certificate replays
    CHECK(wv.point_indices.size() == static_cast<std::size_t>(d) + 2);
  }
}

TEST_CASE("nagata witness budget error and sampling fallback") {
  IntervalSpace line;
  Rng rng(5);
  std::vector<double> q(200), probes(200);
  for (auto& v : q) v = rng.unit();
  for (auto& v : probes) v = rng.unit();
  WitnessOptions opts;
  opts.budget = 1000;
  CHECK_THROWS(nagata_dim_witness(line, q, probes, 1, opts));
  opts.sample_fallback = true;
  auto w = nagata_dim_witness(line, q, probes, 1, opts);
  CHECK(w.verdict == DimVerdict::ConsistentWithDim);  // dimension 1 really holds
  CHECK(w.tuples_searched <= 1000);
}

TEST_CASE("metric_dim_witness") {
  // 0-1 space has dimension 1 on scale 1
  auto [zo, zs] = build_zero_one(6);
  auto grid_zo = realized_distance_grid(zo, zs.points, zs.points);
  auto w0 = metric_dim_witness(zo, zs.points, zs.points, 1, std::int64_t{1}, grid_zo);
  CHECK(w0.verdict == DimVerdict::ConsistentWithDim);

  // modified reals: dimension 1 on scale <= 1/2, violated at scale 1
  ModifiedRealsSpace mr;
  std::vector<Rational> q{Rational(1, 3), Rational(1, 9)};
  std::vector<Rational> probes{Rational(0), Rational(1, 3), Rational(1, 9), Rational(7)};
  auto grid = realized_distance_grid(mr, q, probes);
  auto ws = metric_dim_witness(mr, q, probes, 1, Dyadic::pow2(-1), grid);
  CHECK(ws.verdict == DimVerdict::ConsistentWithDim);
  auto wv = metric_dim_witness(mr, q, probes, 1, Dyadic::one(), grid);
  REQUIRE(wv.verdict == DimVerdict::Violation);
  CHECK(wv.radii == std::vector<Dyadic>{Dyadic::pow2(-1), Dyadic::pow2(-1)});
  CHECK(wv.probe == Rational(0));

  // real line: dimension 2 on any scale (midpoint grid)
  IntervalSpace line;
  Rng rng(23);
  std::vector<double> lq(9), lp(12);
  for (auto& v : lq) v = rng.unit();
  for (auto& v : lp) v = rng.unit();
  auto lgrid = midpoint_distance_grid(line, lq, lp);
  auto wl = metric_dim_witness(line, lq, lp, 2, 10.0, lgrid);
  CHECK(wl.verdict == DimVerdict::ConsistentWithDim);
}

TEST_CASE("metric_dim_witness budget error") {
  IntervalSpace line;
  Rng rng(6);
  std::vector<double> q(300), probes(300);
  for (auto& v : q) v = rng.unit();
  for (auto& v : probes) v = rng.unit();
  auto grid = midpoint_distance_grid(line, q, probes);
  WitnessOptions opts;
  opts.budget = 500;
  CHECK_THROWS(metric_dim_witness(line, q, probes, 2, 10.0, grid, opts));
}

TEST_CASE("metric dimension union bound") {
  // two sets passing at (beta_i, s_i) have a union passing at
  // (beta_1 + beta_2, min(s_1, s_2)) on the same grids
  IntervalSpace line;
  Rng rng(41);
  std::vector<double> q1(6), q2(6), probes(10);
  for (auto& v : q1) v = rng.unit();
  for (auto& v : q2) v = 2.0 + rng.unit();
  for (auto& v : probes) v = 2.5 * rng.unit();
  auto g1 = midpoint_distance_grid(line, q1, probes);
  auto g2 = midpoint_distance_grid(line, q2, probes);
  double s1 = 0.7, s2 = 0.4;
  REQUIRE(metric_dim_witness(line, q1, probes, 2, s1, g1).verdict ==
          DimVerdict::ConsistentWithDim);
  REQUIRE(metric_dim_witness(line, q2, probes, 2, s2, g2).verdict ==
          DimVerdict::ConsistentWithDim);
  std::vector<double> qu = q1;
  qu.insert(qu.end(), q2.begin(), q2.end());
  std::vector<double> gu = g1;
  gu.insert(gu.end(), g2.begin(), g2.end());
  auto wu = metric_dim_witness(line, qu, probes, 4, std::min(s1, s2), gu);
  CHECK(wu.verdict == DimVerdict::ConsistentWithDim);
}

TEST_CASE("r_alpha_empirical") {
  IntervalSpace line;
  // n = 1: the single distance, for any alpha
  std::vector<double> one{0.7};
  CHECK(r_alpha_empirical(line, one, 0.2, 0.5) == doctest::Approx(0.5));
  CHECK(r_alpha_empirical(line, one, 0.2, 1.0) == doctest::Approx(0.5));

  // alpha = 1: the maximum distance (the infimum of radii with full mass)
  std::vector<double> pts{0.1, 0.4, 0.9};
  CHECK(r_alpha_empirical(line, pts, 0.0, 1.0) == doctest::Approx(0.9));

  CHECK_THROWS(r_alpha_empirical(line, pts, 0.5, 0.0));
  CHECK_THROWS(r_alpha_empirical(line, pts, 0.5, 1.5));

  // uniform[0,1] empirical sample: r_{1/2}(1/2) ~ 0.25
  Rng rng(77);
  int n = 4000;
  std::vector<double> big(static_cast<std::size_t>(n));
  for (auto& p : big) p = rng.unit();
  double r = r_alpha_empirical(line, big, 0.5, 0.5);
  // nu(B(0.5, r)) = 2r, so r_alpha = alpha/2 = 0.25; allow 3 * SE-ish slack
  CHECK(r == doctest::Approx(0.25).epsilon(0.1));
}
