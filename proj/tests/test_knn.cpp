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

#include <algorithm>
#include <cmath>

#include "nkl/knn.hpp"
#include "nkl/spaces.hpp"

using namespace nkl;

TEST_CASE("k_nearest basics") {
  IntervalSpace line;
  std::vector<double> pts{0.9, 0.1, 0.5};
  auto ns = k_nearest(line, pts, 0.12, 1, TieBreakPolicy::index_order());
  CHECK(ns.indices == std::vector<std::size_t>{1});
  CHECK(ns.radius == doctest::Approx(0.02));
  CHECK_THROWS(k_nearest(line, pts, 0.1, 0, TieBreakPolicy::index_order()));
  CHECK_THROWS(k_nearest(line, pts, 0.1, 4, TieBreakPolicy::index_order()));
}

TEST_CASE("planar configuration: nearest is 'rectangle'; sphere tie at k = 3 goes to the lower index") {
  PlaneSpace plane;
  // query at the origin; r2 and r3 are exactly tied at distance 5
  std::vector<std::array<double, 2>> pts{
      {{1.0, 0.0}},   // 0: label 1, distance 1
      {{0.0, 1.2}},   // 1: label 0, distance 1.2
      {{3.0, 4.0}},   // 2: label 1, distance 5 exactly
      {{-3.0, 4.0}},  // 3: label 1, distance 5 exactly
  };
  FiniteSample<std::array<double, 2>> sample{pts, {1, 0, 1, 1}};
  std::array<double, 2> q{{0.0, 0.0}};

  CHECK(predict(plane, sample, q, 1, TieBreakPolicy::index_order()) == 1);  // k=1: 'rectangle'

  auto ns = k_nearest(plane, pts, q, 3, TieBreakPolicy::index_order());
  CHECK(ns.open_count == 2);
  CHECK(ns.sphere_count == 2);
  std::vector<std::size_t> got = ns.indices;
  std::sort(got.begin(), got.end());
  CHECK(got == std::vector<std::size_t>{0, 1, 2});  // lower-index sphere point chosen
}

TEST_CASE("uniform tie-breaking picks each 0-1 candidate with frequency 1/n") {
  auto [zo, zs] = build_zero_one(6);
  // external query point: everything is at distance 1
  std::vector<std::int32_t> pts = zs.points;
  ZeroOneSpace zo7{7};
  std::vector<int> hits(6, 0);
  Rng rng(100);
  const int replays = 10000;
  for (int t = 0; t < replays; ++t) {
    auto ns = k_nearest(zo7, pts, 6, 1, TieBreakPolicy::uniform(rng.next_u64()));
    ++hits[ns.indices[0]];
  }
  double se = std::sqrt((1.0 / 6) * (5.0 / 6) / replays);
  for (int i = 0; i < 6; ++i)
    CHECK(std::fabs(hits[i] / static_cast<double>(replays) - 1.0 / 6) <= 3 * se + 1e-12);
}

TEST_CASE("duplicate sample points are ordinary candidates at distance zero") {
  IntervalSpace line;
  std::vector<double> pts{0.5, 0.5, 0.9};  // two coincident points
  auto ns = k_nearest(line, pts, 0.5, 1, TieBreakPolicy::index_order());
  CHECK(ns.radius == 0.0);
  CHECK(ns.indices == std::vector<std::size_t>{0});  // tie among duplicates: lower index
  auto ns2 = k_nearest(line, pts, 0.5, 2, TieBreakPolicy::index_order());
  std::sort(ns2.indices.begin(), ns2.indices.end());
  CHECK(ns2.indices == std::vector<std::size_t>{0, 1});
  // uniform policy picks either duplicate
  int first = 0;
  Rng rng(4);
  for (int t = 0; t < 400; ++t) {
    auto u = k_nearest(line, pts, 0.5, 1, TieBreakPolicy::uniform(rng.next_u64()));
    first += u.indices[0] == 0 ? 1 : 0;
  }
  CHECK(first > 100);
  CHECK(first < 300);
}

TEST_CASE("neighbor set invariants on random samples") {
  IntervalSpace line;
  Rng rng(55);
  for (int t = 0; t < 300; ++t) {
    int n = 3 + static_cast<int>(rng.below(30));
    std::vector<double> pts(static_cast<std::size_t>(n));
    for (auto& p : pts) p = rng.unit();
    double x = rng.unit();
    int k = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    auto pol = rng.below(2) ? TieBreakPolicy::uniform(rng.next_u64()) : TieBreakPolicy::index_order();
    auto ns = k_nearest(line, pts, x, k, pol);
    CHECK(ns.indices.size() == static_cast<std::size_t>(k));
    // all open-ball points included
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (line.distance(pts[i], x) < ns.radius)
        CHECK(std::find(ns.indices.begin(), ns.indices.end(), i) != ns.indices.end());
    // no member beyond the radius
    for (auto i : ns.indices) CHECK(line.distance(pts[i], x) <= ns.radius);
  }
}

TEST_CASE("eta_n and predict") {
  IntervalSpace line;
  FiniteSample<double> all_ones{{0.1, 0.2, 0.3}, {1, 1, 1}};
  CHECK(eta_n(line, all_ones, 0.15, 2, TieBreakPolicy::index_order()) == 1.0);

  FiniteSample<double> mixed{{0.1, 0.2}, {0, 1}};
  CHECK(eta_n(line, mixed, 0.15, 2, TieBreakPolicy::index_order()) == 0.5);
  CHECK(predict(line, mixed, 0.15, 2, TieBreakPolicy::index_order()) == 1);  // tie to 1

  FiniteSample<double> hundred;
  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    hundred.points.push_back(rng.unit());
    hundred.labels.push_back(rng.below(2) ? 1 : 0);
  }
  // eta_n equals the independent recomputation from the same neighbor set
  for (int t = 0; t < 100; ++t) {
    double x = rng.unit();
    int k = 1 + static_cast<int>(rng.below(20));
    auto ns = k_nearest(line, hundred.points, x, k, TieBreakPolicy::index_order());
    double direct = 0;
    for (auto i : ns.indices) direct += hundred.labels[i];
    direct /= static_cast<double>(k);
    CHECK(eta_n(line, hundred, x, k, TieBreakPolicy::index_order()) == direct);
    CHECK((eta_n(line, hundred, x, k, TieBreakPolicy::index_order()) >= 0.5) ==
          (predict(line, hundred, x, k, TieBreakPolicy::index_order()) == 1));
  }

  FiniteSample<double> unlabeled{{0.1, 0.2}, {}};
  CHECK_THROWS(eta_n(line, unlabeled, 0.15, 1, TieBreakPolicy::index_order()));
}

TEST_CASE("bayes_classify thresholds and domain") {
  CHECK(bayes_classify(0.5) == 1);
  CHECK(bayes_classify(0.3) == 0);
  CHECK(bayes_classify(1.0) == 1);
  CHECK(bayes_classify(0.49) == 0);
  CHECK_THROWS(bayes_classify(1.5));
  CHECK_THROWS(bayes_classify(-0.1));
}

TEST_CASE("bayes_error_mc") {
  auto ones = build_interval_distribution_constant(1.0);
  auto e1 = bayes_error_mc(ones, 1000, 1);
  CHECK(e1.mean == 0.0);
  auto half = build_interval_distribution_constant(0.5);
  auto eh = bayes_error_mc(half, 1000, 1);
  CHECK(eh.mean == 0.5);
  auto lin = build_interval_distribution_linear();
  auto el = bayes_error_mc(lin, 40000, 7);
  CHECK(std::fabs(el.mean - 0.25) <= 3 * el.se);
}

TEST_CASE("eta_tilde") {
  IntervalSpace line;
  Rng rng(13);
  FiniteSample<double> sample;
  for (int i = 0; i < 50; ++i) {
    double x = rng.unit();
    sample.points.push_back(x);
    sample.labels.push_back(rng.unit() < x ? 1 : 0);
  }
  // constant eta: eta~ is that constant
  auto const_eta = [](double) { return 0.3; };
  CHECK(eta_tilde(line, sample, 0.5, 5, TieBreakPolicy::index_order(), const_eta) ==
        doctest::Approx(0.3));
  // deterministic labels with eta in {0,1}: eta~ == eta_n
  FiniteSample<double> det;
  for (int i = 0; i < 40; ++i) {
    double x = rng.unit();
    det.points.push_back(x);
    det.labels.push_back(x >= 0.5 ? 1 : 0);
  }
  auto step_eta = [](double x) { return x >= 0.5 ? 1.0 : 0.0; };
  for (int t = 0; t < 50; ++t) {
    double x = rng.unit();
    CHECK(eta_tilde(line, det, x, 3, TieBreakPolicy::index_order(), step_eta) ==
          eta_n(line, det, x, 3, TieBreakPolicy::index_order()));
  }
}

TEST_CASE("lipschitz_extend") {
  IntervalSpace line;
  std::vector<double> q{0.2, 0.6};
  std::vector<double> f{0.4, 0.1};
  // x in Q returns f(x) when f is 1-Lipschitz on Q
  CHECK(lipschitz_extend(line, q, f, 0.2) == doctest::Approx(0.4));
  CHECK(lipschitz_extend(line, q, f, 0.6) == doctest::Approx(0.1));
  // single-point formula
  std::vector<double> q1{0.5}, f1{0.2};
  CHECK(lipschitz_extend(line, q1, f1, 0.8) == doctest::Approx(0.5));
  // cap at one for far points
  CHECK(lipschitz_extend(line, q1, f1, 5.0) == 1.0);
  CHECK_THROWS(lipschitz_extend(line, std::vector<double>{}, std::vector<double>{}, 0.1));

  // extension is 1-Lipschitz on sampled pairs
  Rng rng(21);
  std::vector<double> qq(10), ff(10);
  for (std::size_t i = 0; i < qq.size(); ++i) {
    qq[i] = rng.unit();
    ff[i] = std::min(1.0, std::fabs(qq[i] - 0.3));
  }
  for (int t = 0; t < 1000; ++t) {
    double a = 2.0 * rng.unit() - 0.5, b = 2.0 * rng.unit() - 0.5;
    double fa = lipschitz_extend(line, qq, ff, a);
    double fb = lipschitz_extend(line, qq, ff, b);
    CHECK(std::fabs(fa - fb) <= std::fabs(a - b) + 1e-12);
  }
}

TEST_CASE("fraction transfer: marked fraction of the neighbor set under uniform ties") {
  // whenever the closed and open balls at eps_kNN both carry marked fraction
  // <= alpha, the expected marked fraction of N_k stays <= alpha
  auto [pt, ps] = build_powers_of_two(12);
  Rng rng(61);
  double alpha = 0.4;
  double sum = 0;
  long long cnt = 0;
  for (int t = 0; t < 4000; ++t) {
    std::vector<std::uint8_t> mask(ps.points.size());
    for (auto& b : mask) b = rng.below(10) < 3 ? 1 : 0;
    int k = 1 + static_cast<int>(rng.below(6));
    std::int32_t probe = static_cast<std::int32_t>(1 + rng.below(12));
    std::vector<std::int32_t> cand;
    std::vector<std::uint8_t> cmask;
    for (std::size_t i = 0; i < ps.points.size(); ++i) {
      if (ps.points[i] == probe) continue;
      cand.push_back(ps.points[i]);
      cmask.push_back(mask[i]);
    }
    if (static_cast<std::size_t>(k) > cand.size()) continue;
    auto ns = k_nearest(pt, cand, probe, k, TieBreakPolicy::uniform(rng.next_u64()));
    // fractions in the closed/open balls at the selection radius
    std::size_t cball = 0, cmark = 0, oball = 0, omark = 0;
    for (std::size_t i = 0; i < cand.size(); ++i) {
      auto d = pt.distance(cand[i], probe);
      if (!(ns.radius < d)) {
        ++cball;
        cmark += cmask[i];
      }
      if (d < ns.radius) {
        ++oball;
        omark += cmask[i];
      }
    }
    bool closed_ok = static_cast<double>(cmark) <= alpha * static_cast<double>(cball);
    bool open_ok = oball == 0 || static_cast<double>(omark) <= alpha * static_cast<double>(oball);
    if (!closed_ok || !open_ok) continue;
    double frac = 0;
    for (auto i : ns.indices) frac += cmask[i];
    frac /= static_cast<double>(k);
    sum += frac;
    ++cnt;
  }
  REQUIRE(cnt > 500);
  double mean = sum / static_cast<double>(cnt);
  double se = 0.5 / std::sqrt(static_cast<double>(cnt));  // crude bound on the SE
  CHECK(mean <= alpha + 3 * se);
}
