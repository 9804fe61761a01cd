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

#include <cmath>

#include "nkl/harness.hpp"

using namespace nkl;

TEST_CASE("probe in-degree on the 0-1 space") {
  auto [zo, zs] = build_zero_one(8);
  ZeroOneSpace big{9};
  std::int32_t probe = 8;  // distance 1 to every sample point
  Rng rng(1);
  // index order with the probe taking the replaced slot: only x_1 keeps it
  int deg = probe_in_degree(big, zs.points, probe, 1, TieBreakPolicy::Kind::IndexOrder,
                            ProbeCensusMode::Resolved, rng);
  CHECK(deg == 1);
  // raw candidates: the probe ties as a 1-NN candidate of every point
  int raw = probe_in_degree(big, zs.points, probe, 1, TieBreakPolicy::Kind::IndexOrder,
                            ProbeCensusMode::RawCandidates, rng);
  CHECK(raw == 8);
}

TEST_CASE("harmonic in-degree: n = 2 is exactly 1; n = 4 matches 11/6") {
  auto r2 = harmonic_indegree_experiment(2, 200, 5);
  CHECK(r2.find_stat("mean_indegree_x1")->value == 1.0);
  CHECK(r2.passed());
  auto r4 = harmonic_indegree_experiment(4, 4000, 5);
  CHECK(r4.find_stat("harmonic_number")->exact == "11/6");
  CHECK(r4.passed());
}

TEST_CASE("census in-degree on an interval sample equals a brute-force recount") {
  IntervalSpace line;
  Rng rng(3);
  std::vector<double> pts(20);
  for (auto& p : pts) p = rng.unit();
  int k = 3;
  Rng crng(9);
  auto indeg = census_in_degree(line, pts, k, TieBreakPolicy::Kind::IndexOrder, crng);
  // brute force: for each query, sort the others by distance and take k
  std::vector<int> expect(pts.size(), 0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (j != i) d.emplace_back(std::fabs(pts[j] - pts[i]), j);
    std::sort(d.begin(), d.end());
    for (int c = 0; c < k; ++c) ++expect[d[static_cast<std::size_t>(c)].second];
  }
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK(indeg[i] == expect[i]);
}

TEST_CASE("stone bound experiment holds at small scale") {
  auto res = stone_bound_experiment({1, 3}, 300, 11);
  CHECK(res.passed());
  CHECK(res.find_stat("no_tie_hypothesis_failures")->value == 0.0);
}

TEST_CASE("t-set census: empty mask gives empty T; brute force agrees on all masks at n = 5") {
  IntervalSpace line;
  std::vector<double> pts{0.05, 0.2, 0.45, 0.7, 0.8};
  std::vector<std::uint8_t> empty(5, 0);
  double s = 0.5;
  CHECK(t_set_census(line, pts, empty, 0.25, 2, &s).empty());

  for (int mask = 0; mask < 32; ++mask) {
    std::vector<std::uint8_t> m(5);
    for (int b = 0; b < 5; ++b) m[static_cast<std::size_t>(b)] = (mask >> b) & 1;
    for (double alpha : {0.1, 0.25, 0.5}) {
      auto T = t_set_census(line, pts, m, alpha, 2, &s);
      // independent recount straight from the definition
      std::vector<std::size_t> expect;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        std::vector<double> dists;
        for (std::size_t j = 0; j < pts.size(); ++j)
          if (j != i) dists.push_back(std::fabs(pts[j] - pts[i]));
        std::sort(dists.begin(), dists.end());
        double eps = dists[1];  // k = 2
        if (!(eps < s)) continue;
        int ball = 0, marked = 0;
        for (std::size_t j = 0; j < pts.size(); ++j)
          if (std::fabs(pts[j] - pts[i]) <= eps) {
            ++ball;
            marked += m[j];
          }
        if (marked > alpha * ball) expect.push_back(i);
      }
      CHECK(T == expect);
    }
  }
}

TEST_CASE("t-set bound experiment at small scale") {
  auto res = t_set_bound_experiment({0.1, 0.25, 0.5}, 300, 13);
  CHECK(res.passed());
}

TEST_CASE("expected error: constant distributions") {
  auto ones = build_interval_distribution_constant(1.0);
  auto e1 = estimate_expected_error(ones, 50, 5, 200, TieBreakPolicy::Kind::UniformRandom, 3);
  CHECK(e1.error.mean == 0.0);  // eta == 1: labels and votes all 1

  auto half = build_interval_distribution_constant(0.5);
  auto eh = estimate_expected_error(half, 50, 5, 2000, TieBreakPolicy::Kind::UniformRandom, 3);
  CHECK(std::fabs(eh.error.mean - 0.5) <= 3 * eh.error.se);
}

TEST_CASE("consistency sweep on the constant-1 distribution is error-free") {
  auto ones = build_interval_distribution_constant(1.0);
  auto res = consistency_sweep(ones, {50, 100}, {5, 7}, 100, TieBreakPolicy::Kind::UniformRandom,
                               17);
  const Stat* s1 = res.find_stat("error_n50_k5");
  const Stat* s2 = res.find_stat("error_n100_k7");
  REQUIRE(s1 != nullptr);
  REQUIRE(s2 != nullptr);
  CHECK(s1->value == 0.0);
  CHECK(s2->value == 0.0);
  // rows satisfy the excess bound (trend check not applicable at error 0)
  for (const auto& c : res.checks)
    if (c.name.rfind("plugin_excess_bound", 0) == 0) CHECK(c.pass);
}

TEST_CASE("cover-hart: point mass gives zero radii; davies medians sit on the dyadic grid") {
  // point mass: radius 0 for every n > k
  IntervalSpace line;
  auto row = eps_knn_quantiles(line, [](Rng&) { return 0.42; }, 50, 3, 50, 7);
  CHECK(row.median == 0.0);
  CHECK(row.q90 == 0.0);

  auto res = cover_hart_full_experiment(4, 120, 7);
  CHECK(res.find_check("uniform_median_strictly_decreasing")->pass);
  CHECK(res.find_check("davies_quantiles_non_increasing")->pass);
  for (int n : {250, 1000, 4000}) {
    double m = res.find_stat("davies_median_n" + std::to_string(n))->value;
    bool on_grid = false;
    for (int t = 0; t <= 4; ++t)
      if (m == std::ldexp(1.0, -t)) on_grid = true;
    CHECK((on_grid || m == 0.0));
  }
}

TEST_CASE("davies inconsistency smoke run") {
  DaviesRunConfig cfg;
  cfg.n = 400;
  cfg.k = 15;
  cfg.test_draws = 800;
  auto res = davies_inconsistency_experiment(cfg, 21);
  CHECK(res.find_stat("tie_fraction")->value == 1.0);  // balls of radius 1/2 are huge
  CHECK(std::fabs(res.find_stat("tie_label_mean")->value - 3.0 / 7.0) < 0.05);
  double oracle = res.find_stat("oracle_error")->value;
  CHECK(std::fabs(res.find_stat("expected_error")->value - oracle) < 0.06);
}

TEST_CASE("cantor ties: degenerate single-letter first level ties everything") {
  // hand-built schedule: N_1 = 1 forces every pair to agree at level 1
  CantorSchedule sch;
  sch.delta = Rational(1, 5);
  sch.depth = 2;
  sch.levels.push_back(CantorLevel{1, 2, Rational(1, 20)});
  sch.levels.push_back(CantorLevel{1000000, 30, Rational(1, 40)});
  auto res = cantor_ties_experiment(sch, 1, 300, 5);
  CHECK(res.find_stat("full_tie_frequency")->value == 1.0);

  // built schedule at delta = 0.4, level 1
  auto built = build_cantor_schedule(Rational(2, 5), 2);
  auto res2 = cantor_ties_experiment(built, 1, 400, 5);
  CHECK(res2.passed());
  CHECK_THROWS(cantor_ties_experiment(built, 2, 10, 5));  // needs depth >= 3
}

TEST_CASE("eta diagnostic bound at small scale") {
  auto dist = build_interval_distribution_linear();
  auto res = eta_diagnostic_experiment(dist, 200, {10, 25}, 800, 19);
  CHECK(res.passed());
  // the measured value should also be well under 1/k in absolute terms
  CHECK(res.find_stat("sq_dev_k10")->value < 0.1);
}

TEST_CASE("r-alpha experiment at small scale") {
  auto res = r_alpha_experiment(500, 40, 23);
  CHECK(res.passed());
}

TEST_CASE("concentration: eta == 1 never exceeds; vacuous points are flagged") {
  auto ones = build_interval_distribution_constant(1.0);
  std::vector<ConcentrationPoint> pts{
      {2000, 45, 0.1, 0, 2000},       // vacuous
      {100000, 317, 0.15, 10, 1000},  // tiny run, exceedance must be 0
  };
  auto res = strong_concentration_experiment(ones, 2.0, pts, 29);
  CHECK(res.find_check("vacuous_n2000_eps0.1") != nullptr);
  CHECK(res.find_stat("exceedance_n100000_eps0.15")->value == 0.0);
  CHECK(res.passed());
  // inner-test budget guard
  std::vector<ConcentrationPoint> bad{{100000, 317, 0.15, 2, 10}};
  CHECK_THROWS(strong_concentration_experiment(ones, 2.0, bad, 29));
}

TEST_CASE("bit-reproducibility: same seed, same aggregates; workers do not change results") {
  auto a = harmonic_indegree_experiment(10, 500, 77, 1);
  auto b = harmonic_indegree_experiment(10, 500, 77, 1);
  CHECK(a.find_stat("mean_indegree_x1")->sum == b.find_stat("mean_indegree_x1")->sum);
  CHECK(a.find_stat("mean_indegree_x1")->sumsq == b.find_stat("mean_indegree_x1")->sumsq);
  auto c = harmonic_indegree_experiment(10, 500, 77, 3);
  CHECK(a.find_stat("mean_indegree_x1")->sum == c.find_stat("mean_indegree_x1")->sum);
  CHECK(a.find_stat("mean_indegree_x1")->sumsq == c.find_stat("mean_indegree_x1")->sumsq);

  DaviesRunConfig cfg;
  cfg.n = 100;
  cfg.k = 5;
  cfg.test_draws = 50;
  auto d1 = davies_inconsistency_experiment(cfg, 31, 1);
  auto d2 = davies_inconsistency_experiment(cfg, 31, 2);
  CHECK(d1.find_stat("expected_error")->sum == d2.find_stat("expected_error")->sum);
  CHECK(d1.find_stat("tie_label_mean")->sum == d2.find_stat("tie_label_mean")->sum);
}

TEST_CASE("pass/fail is recomputable from the stored raw aggregates") {
  auto res = harmonic_indegree_experiment(4, 2000, 7);
  const Stat* s = res.find_stat("mean_indegree_x1");
  REQUIRE(s != nullptr);
  double mean = s->sum / static_cast<double>(s->trials);
  double var = (s->sumsq - s->sum * s->sum / static_cast<double>(s->trials)) /
               static_cast<double>(s->trials - 1);
  double se = std::sqrt(var / static_cast<double>(s->trials));
  CHECK(mean == s->value);
  CHECK(se == doctest::Approx(s->se));
  double target = res.find_stat("harmonic_number")->value;
  const Check* c = res.find_check("mean_indegree_matches_harmonic_number");
  REQUIRE(c != nullptr);
  CHECK(c->pass == (std::fabs(mean - target) <= 3 * se));
}
