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

#ifndef NKL_HARNESS_HPP
#define NKL_HARNESS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <thread>
#include <vector>

#include "nkl/davies.hpp"
#include "nkl/dimension.hpp"
#include "nkl/knn.hpp"
#include "nkl/spaces.hpp"

namespace nkl {

// ---------------------------------------------------------------------------
// Experiment result container.  Every estimate carries its trial count and
// standard error plus the raw aggregates (sum, sumsq) it was computed from,
// so each pass/fail is recomputable.

struct Stat {
  std::string name;
  double value = 0.0;
  double se = 0.0;
  long long trials = 0;
  double sum = 0.0;
  double sumsq = 0.0;
  std::string exact;  // optional exact rational rendering

  static Stat scalar(std::string name, double v) {
    Stat s;
    s.name = std::move(name);
    s.value = v;
    s.trials = 1;
    s.sum = v;
    return s;
  }
  static Stat estimate(std::string name, const MonteCarloEstimate& e) {
    Stat s;
    s.name = std::move(name);
    s.value = e.mean;
    s.se = e.se;
    s.trials = e.trials;
    s.sum = e.sum;
    s.sumsq = e.sumsq;
    return s;
  }
  static Stat exact_value(std::string name, const Rational& r) {
    Stat s;
    s.name = std::move(name);
    s.value = r.to_double();
    s.trials = 1;
    s.sum = s.value;
    s.exact = r.to_string();
    return s;
  }
};

struct Check {
  std::string name;
  bool pass = false;
  double observed = 0.0;
  double bound = 0.0;
  std::string relation;
};

struct ExperimentResult {
  std::string experiment;
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<Stat> stats;
  std::vector<Check> checks;

  bool passed() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  void param(const std::string& k, const std::string& v) { params.emplace_back(k, v); }
  void param(const std::string& k, long long v) { params.emplace_back(k, std::to_string(v)); }
  const Stat* find_stat(const std::string& name) const {
    for (const auto& s : stats)
      if (s.name == name) return &s;
    return nullptr;
  }
  const Check* find_check(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

class Accumulator {
public:
  void add(double v) {
    sum_ += v;
    sumsq_ += v * v;
    ++n_;
  }
  MonteCarloEstimate finish() const { return finish_estimate(sum_, sumsq_, n_); }
  long long count() const { return n_; }

private:
  double sum_ = 0.0, sumsq_ = 0.0;
  long long n_ = 0;
};

/// Runs fn(t) for t in [0, trials) across `workers` threads.  fn must write
/// only into its own trial's slots; callers reduce the slot arrays in index
/// order afterwards, so the aggregates do not depend on the schedule.
template <class Fn>
void for_each_trial(long long trials, int workers, Fn&& fn) {
  if (workers <= 1 || trials < 4) {
    for (long long t = 0; t < trials; ++t) fn(t);
    return;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&fn, trials, w, workers]() {
      for (long long t = w; t < trials; t += workers) fn(t);
    });
  }
  for (auto& th : pool) th.join();
}

// ---------------------------------------------------------------------------
// In-degree censuses.

/// For every sample point x_j, the number of sample points x_i whose k-NN set
/// (computed among the sample with x_i removed) contains x_j.
template <MetricSpace S>
std::vector<int> census_in_degree(const S& space,
                                  const std::vector<typename S::point_type>& pts, int k,
                                  TieBreakPolicy::Kind kind, Rng& rng,
                                  int* hypothesis_failures = nullptr) {
  const std::size_t n = pts.size();
  std::vector<int> indeg(n, 0);
  std::vector<typename S::point_type> cand;
  cand.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    cand.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) cand.push_back(pts[j]);
    TieBreakPolicy pol = kind == TieBreakPolicy::Kind::IndexOrder
                             ? TieBreakPolicy::index_order()
                             : TieBreakPolicy::uniform(rng.next_u64());
    auto ns = k_nearest(space, cand, pts[i], k, pol);
    if (hypothesis_failures &&
        ns.open_count + ns.sphere_count != static_cast<std::size_t>(k))
      ++*hypothesis_failures;
    for (auto c : ns.indices) {
      std::size_t orig = c < i ? c : c + 1;
      ++indeg[orig];
    }
  }
  return indeg;
}

enum class ProbeCensusMode { Resolved, RawCandidates };

/// In-degree of an external probe adjoined to the sample.  For the query at
/// slot i the candidates are (x_1..x_{i-1}, probe, x_{i+1}..x_n): the probe
/// takes over the replaced slot's index, which is what index tie-breaking
/// compares.  RawCandidates counts the probe whenever it lies within the
/// query's eps_kNN ball, with no tie resolution at all.
template <MetricSpace S>
int probe_in_degree(const S& space, const std::vector<typename S::point_type>& pts,
                    const typename S::point_type& probe, int k, TieBreakPolicy::Kind kind,
                    ProbeCensusMode mode, Rng& rng) {
  const std::size_t n = pts.size();
  int deg = 0;
  std::vector<typename S::point_type> cand;
  for (std::size_t i = 0; i < n; ++i) {
    cand = pts;
    cand[i] = probe;
    if (mode == ProbeCensusMode::RawCandidates) {
      auto r = eps_knn_radius(space, cand, pts[i], k);
      if (!(r < space.distance(probe, pts[i]))) ++deg;
      continue;
    }
    TieBreakPolicy pol = kind == TieBreakPolicy::Kind::IndexOrder
                             ? TieBreakPolicy::index_order()
                             : TieBreakPolicy::uniform(rng.next_u64());
    auto ns = k_nearest(space, cand, pts[i], k, pol);
    for (auto c : ns.indices)
      if (c == i) ++deg;
  }
  return deg;
}

/// Exact harmonic number H_m as a rational.
inline Rational harmonic_number(int m) {
  Rational h(0);
  for (int i = 1; i <= m; ++i) h = h + Rational(1, i);
  return h;
}

/// Mean in-degree of x_1 on the powers-of-two chain with k = 1 and uniform
/// ties; the target is H_{n-1}.
inline ExperimentResult harmonic_indegree_experiment(int n, long long trials, std::uint64_t seed,
                                                     int workers = 1) {
  auto built = build_powers_of_two(n);
  const auto& space = built.first;
  const auto& sample = built.second;
  ExperimentResult res;
  res.experiment = "harmonic-indegree";
  res.param("n", n);
  res.param("trials", trials);
  std::vector<double> slot(static_cast<std::size_t>(trials));
  for_each_trial(trials, workers, [&](long long t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    auto indeg = census_in_degree(space, sample.points, 1, TieBreakPolicy::Kind::UniformRandom, rng);
    slot[static_cast<std::size_t>(t)] = static_cast<double>(indeg[0]);
  });
  Accumulator acc;
  for (double v : slot) acc.add(v);
  auto est = acc.finish();
  Rational target = harmonic_number(n - 1);
  res.stats.push_back(Stat::estimate("mean_indegree_x1", est));
  res.stats.push_back(Stat::exact_value("harmonic_number", target));
  double tol = 3.0 * est.se;
  res.checks.push_back(Check{"mean_indegree_matches_harmonic_number",
                             std::fabs(est.mean - target.to_double()) <= tol,
                             est.mean - target.to_double(), tol, "|obs - H_{n-1}| <= 3*SE"});
  return res;
}

/// Degree bound (k+1)*beta over randomized samples whose neighbor sets are
/// unambiguous: cell dendrograms (beta = 1) and uniform[0,1] (beta = 2).
/// Every query's no-tie hypothesis (closed eps_kNN ball of exactly k+1
/// points) is verified alongside the bound.
inline ExperimentResult stone_bound_experiment(const std::vector<int>& ks,
                                               long long trials_per_k, std::uint64_t seed,
                                               int workers = 1) {
  ExperimentResult res;
  res.experiment = "stone-bound";
  res.param("trials_per_k", trials_per_k);
  long long violations_ultra = 0, violations_line = 0, hypo_failures = 0;
  for (std::size_t ki = 0; ki < ks.size(); ++ki) {
    int k = ks[ki];
    std::vector<std::int8_t> vu(static_cast<std::size_t>(trials_per_k), 0);
    std::vector<std::int8_t> vl(static_cast<std::size_t>(trials_per_k), 0);
    std::vector<std::int16_t> hf(static_cast<std::size_t>(trials_per_k), 0);
    for_each_trial(trials_per_k, workers, [&, k, ki](long long t) {
      Rng rng(derive_seed(seed + ki, static_cast<std::uint64_t>(t)));
      int cells = 3 + static_cast<int>(rng.below(6));
      auto built = make_tie_free_ultrametric(cells, k, rng);
      int fails = 0;
      auto indeg =
          census_in_degree(built.first, built.second.points, k, TieBreakPolicy::Kind::IndexOrder,
                           rng, &fails);
      for (auto d : indeg)
        if (d > (k + 1) * 1) vu[static_cast<std::size_t>(t)] = 1;
      int n = 40 + static_cast<int>(rng.below(41));
      if (n <= k + 1) n = k + 2;
      IntervalSpace line;
      std::vector<double> pts(static_cast<std::size_t>(n));
      for (auto& p : pts) p = rng.unit();
      auto indeg2 =
          census_in_degree(line, pts, k, TieBreakPolicy::Kind::IndexOrder, rng, &fails);
      for (auto d : indeg2)
        if (d > (k + 1) * 2) vl[static_cast<std::size_t>(t)] = 1;
      hf[static_cast<std::size_t>(t)] = static_cast<std::int16_t>(fails);
    });
    for (long long t = 0; t < trials_per_k; ++t) {
      violations_ultra += vu[static_cast<std::size_t>(t)];
      violations_line += vl[static_cast<std::size_t>(t)];
      hypo_failures += hf[static_cast<std::size_t>(t)];
    }
  }
  res.stats.push_back(Stat::scalar("violations_ultrametric", static_cast<double>(violations_ultra)));
  res.stats.push_back(Stat::scalar("violations_real_line", static_cast<double>(violations_line)));
  res.stats.push_back(Stat::scalar("no_tie_hypothesis_failures", static_cast<double>(hypo_failures)));
  res.checks.push_back(Check{"ultrametric_indegree_bound", violations_ultra == 0,
                             static_cast<double>(violations_ultra), 0.0, "violating trials == 0"});
  res.checks.push_back(Check{"real_line_indegree_bound", violations_line == 0,
                             static_cast<double>(violations_line), 0.0, "violating trials == 0"});
  res.checks.push_back(Check{"no_tie_hypothesis_held", hypo_failures == 0,
                             static_cast<double>(hypo_failures), 0.0, "failures == 0"});
  return res;
}

// ---------------------------------------------------------------------------
// T-set census (scale-bounded fraction lemma).

/// T = { x_i : eps_kNN(x_i) < s and the marked fraction of its closed ball
/// exceeds alpha }.  The ball lives in the full sample (x_i included);
/// eps_kNN is the k-th neighbor distance among the others.  Null scale means
/// unbounded.
template <MetricSpace S>
std::vector<std::size_t> t_set_census(const S& space,
                                      const std::vector<typename S::point_type>& pts,
                                      const std::vector<std::uint8_t>& mask, double alpha, int k,
                                      const typename S::distance_type* scale) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("t_set_census: alpha must lie in (0,1)");
  const std::size_t n = pts.size();
  std::vector<std::size_t> t_set;
  std::vector<typename S::point_type> cand;
  for (std::size_t i = 0; i < n; ++i) {
    cand.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) cand.push_back(pts[j]);
    auto eps = eps_knn_radius(space, cand, pts[i], k);
    if (scale && !(eps < *scale)) continue;
    std::size_t ball = 0, marked = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!(eps < space.distance(pts[j], pts[i]))) {
        ++ball;
        marked += mask[j];
      }
    }
    if (static_cast<double>(marked) > alpha * static_cast<double>(ball)) t_set.push_back(i);
  }
  return t_set;
}

inline ExperimentResult t_set_bound_experiment(const std::vector<double>& alphas,
                                               long long trials, std::uint64_t seed,
                                               int workers = 1) {
  ExperimentResult res;
  res.experiment = "t-set-bound";
  res.param("trials", trials);
  std::vector<std::int8_t> vu(static_cast<std::size_t>(trials), 0);
  std::vector<std::int8_t> vl(static_cast<std::size_t>(trials), 0);
  for_each_trial(trials, workers, [&](long long t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    int n1 = 30 + static_cast<int>(rng.below(31));
    auto dend = make_random_dendrogram(n1, rng);
    std::vector<std::uint8_t> mask1(static_cast<std::size_t>(n1));
    long long m1 = 0;
    for (auto& b : mask1) m1 += (b = rng.below(10) < 3 ? 1 : 0);
    for (double a : alphas) {
      auto T = t_set_census(dend.first, dend.second.points, mask1, a, 3,
                            static_cast<std::int64_t*>(nullptr));
      if (static_cast<double>(T.size()) > 1.0 * static_cast<double>(m1) / a)
        vu[static_cast<std::size_t>(t)] = 1;
    }
    int n2 = 80 + static_cast<int>(rng.below(41));
    IntervalSpace line;
    std::vector<double> pts(static_cast<std::size_t>(n2));
    for (auto& p : pts) p = rng.unit();
    std::vector<std::uint8_t> mask2(static_cast<std::size_t>(n2));
    long long m2 = 0;
    for (auto& b : mask2) m2 += (b = rng.below(10) < 3 ? 1 : 0);
    double s = 0.3;
    for (double a : alphas) {
      auto T = t_set_census(line, pts, mask2, a, 5, &s);
      if (static_cast<double>(T.size()) > 2.0 * static_cast<double>(m2) / a)
        vl[static_cast<std::size_t>(t)] = 1;
    }
  });
  long long viol_ultra = 0, viol_line = 0;
  for (long long t = 0; t < trials; ++t) {
    viol_ultra += vu[static_cast<std::size_t>(t)];
    viol_line += vl[static_cast<std::size_t>(t)];
  }
  res.stats.push_back(Stat::scalar("violations_ultrametric", static_cast<double>(viol_ultra)));
  res.stats.push_back(Stat::scalar("violations_real_line", static_cast<double>(viol_line)));
  res.checks.push_back(Check{"t_set_bound_ultrametric", viol_ultra == 0,
                             static_cast<double>(viol_ultra), 0.0, "violating trials == 0"});
  res.checks.push_back(Check{"t_set_bound_real_line", viol_line == 0,
                             static_cast<double>(viol_line), 0.0, "violating trials == 0"});
  return res;
}

// ---------------------------------------------------------------------------
// Expected-error estimation and the consistency sweep.

struct ErrorEstimate {
  MonteCarloEstimate error;
  MonteCarloEstimate eta_dev;  // E|eta - eta_n|
  MonteCarloEstimate margin;   // per-trial err_t - 2*|eta - eta_n|_t
};

/// Unbiased Monte Carlo estimate of the expected error probability: each
/// trial draws a fresh labeled training sample and one fresh test pair.
template <class Dist>
ErrorEstimate estimate_expected_error(const Dist& dist, int n, int k, long long trials,
                                      TieBreakPolicy::Kind kind, std::uint64_t seed,
                                      int workers = 1) {
  if (trials < 1) throw std::invalid_argument("estimate_expected_error: trials >= 1 required");
  auto space = dist.space();
  std::vector<double> err_slot(static_cast<std::size_t>(trials));
  std::vector<double> dev_slot(static_cast<std::size_t>(trials));
  for_each_trial(trials, workers, [&](long long t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    FiniteSample<double> sample;
    sample.points.resize(static_cast<std::size_t>(n));
    sample.labels.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      double x = dist.sample(rng);
      sample.points[static_cast<std::size_t>(i)] = x;
      sample.labels[static_cast<std::size_t>(i)] = rng.unit() < dist.eta(x) ? 1 : 0;
    }
    double xt = dist.sample(rng);
    std::uint8_t yt = rng.unit() < dist.eta(xt) ? 1 : 0;
    TieBreakPolicy pol = kind == TieBreakPolicy::Kind::IndexOrder
                             ? TieBreakPolicy::index_order()
                             : TieBreakPolicy::uniform(rng.next_u64());
    auto ns = k_nearest(space, sample.points, xt, k, pol);
    double etan = eta_n_from(ns, sample.labels);
    int pred = predict_from(ns, sample.labels);
    err_slot[static_cast<std::size_t>(t)] = pred != yt ? 1.0 : 0.0;
    dev_slot[static_cast<std::size_t>(t)] = std::fabs(dist.eta(xt) - etan);
  });
  Accumulator err, dev, margin;
  for (long long t = 0; t < trials; ++t) {
    double e = err_slot[static_cast<std::size_t>(t)];
    double d = dev_slot[static_cast<std::size_t>(t)];
    err.add(e);
    dev.add(d);
    margin.add(e - 2.0 * d);
  }
  return ErrorEstimate{err.finish(), dev.finish(), margin.finish()};
}

/// Error sweep over an n-schedule with k = k(n); checks the plug-in excess
/// bound err - bayes <= 2 E|eta - eta_n| (up to 3 SE) on every row and the
/// downward error trend between the first and last rows.
template <class Dist>
ExperimentResult consistency_sweep(const Dist& dist, const std::vector<int>& n_schedule,
                                   const std::vector<int>& k_schedule, long long trials,
                                   TieBreakPolicy::Kind kind, std::uint64_t seed,
                                   int workers = 1) {
  ExperimentResult res;
  res.experiment = "consistency-sweep";
  res.param("trials", trials);
  res.param("distribution", dist.name());
  double bayes = dist.bayes_error();
  res.stats.push_back(Stat::scalar("bayes_error_oracle", bayes));
  std::vector<ErrorEstimate> rows;
  for (std::size_t r = 0; r < n_schedule.size(); ++r) {
    int n = n_schedule[r];
    int k = k_schedule[r];
    auto est = estimate_expected_error(dist, n, k, trials, kind,
                                       derive_seed(seed, 1000 + static_cast<std::uint64_t>(r)),
                                       workers);
    rows.push_back(est);
    std::string tag = "n" + std::to_string(n) + "_k" + std::to_string(k);
    res.stats.push_back(Stat::estimate("error_" + tag, est.error));
    res.stats.push_back(Stat::estimate("eta_dev_" + tag, est.eta_dev));
    double lhs = est.margin.mean - bayes;
    double tol = 3.0 * est.margin.se;
    res.checks.push_back(Check{"plugin_excess_bound_" + tag, lhs <= tol, lhs, tol,
                               "mean(err - 2|eta-eta_n|) - bayes <= 3*SE"});
  }
  if (rows.size() >= 2) {
    const auto& f = rows.front().error;
    const auto& l = rows.back().error;
    double gap = f.mean - l.mean;
    double tol = 3.0 * std::sqrt(f.se * f.se + l.se * l.se);
    res.checks.push_back(Check{"error_decreases_along_n", gap > tol, gap, tol,
                               "error(first n) - error(last n) > 3*SE"});
  }
  return res;
}

// ---------------------------------------------------------------------------
// Cover-Hart radius trend.

struct QuantileRow {
  int n = 0, k = 0;
  double median = 0.0, q90 = 0.0;
  long long draws = 0;
};

template <class Space, class SampleFn>
QuantileRow eps_knn_quantiles(const Space& space, SampleFn&& draw_point, int n, int k,
                              long long draws, std::uint64_t seed) {
  std::vector<double> eps;
  eps.reserve(static_cast<std::size_t>(draws));
  for (long long t = 0; t < draws; ++t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    std::vector<typename Space::point_type> pts(static_cast<std::size_t>(n));
    for (auto& p : pts) p = draw_point(rng);
    auto x = draw_point(rng);
    eps.push_back(to_real(eps_knn_radius(space, pts, x, k)));
  }
  std::sort(eps.begin(), eps.end());
  auto quant = [&](double q) {
    std::size_t ix = static_cast<std::size_t>(q * static_cast<double>(eps.size() - 1));
    return eps[ix];
  };
  return QuantileRow{n, k, quant(0.5), quant(0.9), draws};
}

/// Median (and 0.9-quantile) of eps_kNN along an n-schedule with k = ceil
/// sqrt(n), on uniform[0,1] and on the Davies space; checks a strict decrease
/// of the median between consecutive rows for both.
inline ExperimentResult cover_hart_full_experiment(int davies_depth, long long draws,
                                                   std::uint64_t seed) {
  ExperimentResult res;
  res.experiment = "cover-hart";
  res.param("draws", draws);
  res.param("davies_depth", davies_depth);
  std::vector<int> ns{250, 1000, 4000};

  IntervalSpace line;
  auto lin = build_interval_distribution_linear();
  std::vector<QuantileRow> urows;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    int n = ns[i];
    int k = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
    auto row = eps_knn_quantiles(line, [&](Rng& r) { return lin.sample(r); }, n, k, draws,
                                 derive_seed(seed, i));
    urows.push_back(row);
    res.stats.push_back(Stat::scalar("uniform_median_n" + std::to_string(n), row.median));
    res.stats.push_back(Stat::scalar("uniform_q90_n" + std::to_string(n), row.q90));
  }
  bool umono = true;
  for (std::size_t i = 0; i + 1 < urows.size(); ++i)
    if (!(urows[i + 1].median < urows[i].median)) umono = false;
  res.checks.push_back(Check{"uniform_median_strictly_decreasing", umono, umono ? 1.0 : 0.0, 1.0,
                             "median eps_kNN strictly decreasing along n"});

  DaviesParams params = davies_params(davies_depth);
  DaviesSampler sampler(params);
  DaviesSpace base{params};
  DaviesSampledSpace dspace{&base};
  std::vector<QuantileRow> drows;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    int n = ns[i];
    int k = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
    auto row = eps_knn_quantiles(
        dspace, [&](Rng& r) { return sampler.sample_labeled_pair(r).first; }, n, k, draws,
        derive_seed(seed, 100 + i));
    drows.push_back(row);
    res.stats.push_back(Stat::scalar("davies_median_n" + std::to_string(n), row.median));
    res.stats.push_back(Stat::scalar("davies_q90_n" + std::to_string(n), row.q90));
  }
  bool dmono_strict = true, dmono = true;
  for (std::size_t i = 0; i + 1 < drows.size(); ++i) {
    if (!(drows[i + 1].median < drows[i].median)) dmono_strict = false;
    if (drows[i + 1].median > drows[i].median) dmono = false;
  }
  res.checks.push_back(Check{"davies_median_strictly_decreasing", dmono_strict,
                             dmono_strict ? 1.0 : 0.0, 1.0,
                             "median eps_kNN strictly decreasing along n"});
  res.checks.push_back(Check{"davies_quantiles_non_increasing", dmono, dmono ? 1.0 : 0.0, 1.0,
                             "median eps_kNN non-increasing along n"});
  return res;
}

// ---------------------------------------------------------------------------
// Davies experiments.

struct DaviesRunConfig {
  int depth = 4;
  int n = 2000;
  int k = 40;
  long long test_draws = 10000;
};

/// Tie-regime label mean, expected error, and the exact binomial oracle.
/// Uniform tie-breaking is mandatory here.
inline ExperimentResult davies_inconsistency_experiment(const DaviesRunConfig& cfg,
                                                        std::uint64_t seed, int workers = 1) {
  ExperimentResult res;
  res.experiment = "davies-inconsistency";
  res.param("depth", cfg.depth);
  res.param("n", cfg.n);
  res.param("k", cfg.k);
  res.param("test_draws", cfg.test_draws);
  DaviesParams params = davies_params(cfg.depth);
  DaviesSampler sampler(params);
  DaviesSpace base{params};
  DaviesSampledSpace space{&base};

  const std::size_t T = static_cast<std::size_t>(cfg.test_draws);
  std::vector<double> err_slot(T), tie_slot(T, -1.0);
  std::vector<std::int32_t> flag_slot(T, 0);
  for_each_trial(cfg.test_draws, workers, [&](long long t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    auto sample = davies_sample_labeled(sampler, cfg.n, rng);
    auto pair = sampler.sample_labeled_pair(rng);
    auto ns = k_nearest(space, sample.points, pair.first, cfg.k,
                        TieBreakPolicy::uniform(rng.next_u64()));
    std::int32_t flags = 0;
    for (auto i : ns.indices)
      if (base.distance_flagged(sample.points[i], pair.first).truncated) ++flags;
    flag_slot[static_cast<std::size_t>(t)] = flags;
    int pred = predict_from(ns, sample.labels);
    err_slot[static_cast<std::size_t>(t)] = pred != pair.second ? 1.0 : 0.0;
    if (ns.radius < Dyadic::one())
      tie_slot[static_cast<std::size_t>(t)] = eta_n_from(ns, sample.labels);
  });
  Accumulator tie_mean, err;
  long long tie_draws = 0, flagged = 0;
  for (std::size_t t = 0; t < T; ++t) {
    err.add(err_slot[t]);
    flagged += flag_slot[t];
    if (tie_slot[t] >= 0.0) {
      ++tie_draws;
      tie_mean.add(tie_slot[t]);
    }
  }
  Rational oracle = davies_oracle_error(cfg.k);
  auto tie_est = tie_mean.finish();
  auto err_est = err.finish();
  res.stats.push_back(Stat::estimate("tie_label_mean", tie_est));
  res.stats.push_back(Stat::estimate("expected_error", err_est));
  res.stats.push_back(Stat::exact_value("oracle_error", oracle));
  res.stats.push_back(Stat::exact_value("majority_prob", davies_majority_prob(cfg.k)));
  res.stats.push_back(Stat::scalar(
      "tie_fraction", static_cast<double>(tie_draws) / static_cast<double>(cfg.test_draws)));
  res.stats.push_back(Stat::scalar("flagged_neighbor_pairs", static_cast<double>(flagged)));
  res.checks.push_back(Check{"tie_label_mean_three_sevenths",
                             std::fabs(tie_est.mean - 3.0 / 7.0) <= 0.02, tie_est.mean - 3.0 / 7.0,
                             0.02, "|obs - 3/7| <= 0.02"});
  res.checks.push_back(Check{"error_matches_binomial_oracle",
                             std::fabs(err_est.mean - oracle.to_double()) <= 0.02,
                             err_est.mean - oracle.to_double(), 0.02, "|obs - oracle| <= 0.02"});
  res.checks.push_back(
      Check{"error_above_0.45", err_est.mean > 0.45, err_est.mean, 0.45, "obs > 0.45"});
  return res;
}

/// Exact parameter chain, equal-ball identity, and empirical ball
/// frequencies against the closed forms.
inline ExperimentResult davies_measures_experiment(int depth, long long draws,
                                                   std::uint64_t seed) {
  ExperimentResult res;
  res.experiment = "davies-measures";
  res.param("depth", depth);
  res.param("draws", draws);
  DaviesParams params = davies_params(depth);
  res.stats.push_back(Stat::scalar("p1", static_cast<double>(params.level(1).p)));
  res.stats.push_back(Stat::exact_value("alpha1", params.level(1).alpha));
  res.stats.push_back(Stat::exact_value("beta1", params.level(1).beta));
  bool chain_ok = params.level(1).p == 3 && params.level(1).alpha == Rational(5, 72) &&
                  params.level(1).beta == Rational(1, 72);
  Rational pa(2, 3), pb(1, 3);
  for (int t = 1; t <= depth; ++t) {
    Rational p(params.level(t).p);
    chain_ok = chain_ok && p * p * params.level(t).alpha + p * params.level(t).beta == pa &&
               p * p * params.level(t).beta + p * params.level(t).alpha == pb;
    pa = params.level(t).alpha;
    pb = params.level(t).beta;
  }
  res.checks.push_back(Check{"exact_chain", chain_ok, chain_ok ? 1.0 : 0.0, 1.0,
                             "p1 = 3, alpha1 = 5/72, beta1 = 1/72; identities exact per level"});

  DaviesSampler sampler(params);
  Rng rng(seed);
  long long equal_ball_failures = 0;
  for (int rep = 0; rep < 50; ++rep) {
    auto x = sampler.sample_point(rng.below(2) == 1, rng);
    for (int t = 1; t <= depth; ++t) {
      auto ra = davies_ball_measure(params, x, Dyadic::pow2(-t), DaviesMeasure::MuA);
      auto rb = davies_ball_measure(params, x, Dyadic::pow2(-t), DaviesMeasure::MuB);
      if (ra != rb) ++equal_ball_failures;
      auto r0 = davies_ball_measure(params, x, Dyadic::pow2(-t), DaviesMeasure::Mu0);
      auto r1 = davies_ball_measure(params, x, Dyadic::pow2(-t), DaviesMeasure::Mu1);
      if (r0 != Rational(4, 3) * r1) ++equal_ball_failures;
    }
  }
  res.checks.push_back(Check{"equal_ball_measures", equal_ball_failures == 0,
                             static_cast<double>(equal_ball_failures), 0.0, "failures == 0"});

  auto xref = sampler.sample_point(false, rng);
  bool freq_ok = true;
  DaviesSpace base{params};
  for (int t = 1; t <= 2; ++t) {
    Rational closed = davies_ball_measure(params, xref, Dyadic::pow2(-t), DaviesMeasure::Mu);
    Accumulator acc;
    for (long long i = 0; i < draws; ++i) {
      auto pair = sampler.sample_labeled_pair(rng);
      acc.add(!(Dyadic::pow2(-t) < base.distance(pair.first, xref)) ? 1.0 : 0.0);
    }
    auto est = acc.finish();
    double tol = 3.0 * std::max(est.se, 1e-9);
    std::string tag = "ball_freq_t" + std::to_string(t);
    res.stats.push_back(Stat::estimate(tag, est));
    res.stats.push_back(Stat::exact_value(tag + "_closed_form", closed));
    if (std::fabs(est.mean - closed.to_double()) > tol) freq_ok = false;
  }
  res.checks.push_back(Check{"ball_frequency_matches_closed_form", freq_ok, freq_ok ? 1.0 : 0.0,
                             1.0, "|freq - closed form| <= 3*SE"});

  Accumulator ylab;
  for (long long i = 0; i < draws; ++i) ylab.add(sampler.sample_labeled_pair(rng).second);
  auto yest = ylab.finish();
  res.stats.push_back(Stat::estimate("label_one_rate", yest));
  res.checks.push_back(Check{"label_rate_0.6", std::fabs(yest.mean - 0.6) <= 3.0 * yest.se,
                             yest.mean - 0.6, 3.0 * yest.se, "|obs - 0.6| <= 3*SE"});
  return res;
}

// ---------------------------------------------------------------------------
// Cantor ties.

/// Frequency of the full-tie event for X_1 at the given level: all of its
/// (n_level - 1) nearest neighbors among an n_{level+1}-sample sit at the
/// same positive, uncapped distance.  Also measures the two construction
/// sub-events (coverage at `level`, birthday at `level+1`).
inline ExperimentResult cantor_ties_experiment(const CantorSchedule& schedule, int level,
                                               long long trials, std::uint64_t seed,
                                               int workers = 1) {
  if (level < 1 || level + 1 > schedule.depth)
    throw std::invalid_argument("cantor_ties_experiment: need schedule depth >= level + 1");
  ExperimentResult res;
  res.experiment = "cantor-ties";
  res.param("level", level);
  res.param("trials", trials);
  res.param("delta", schedule.delta.to_string());
  const auto& lev = schedule.levels[static_cast<std::size_t>(level - 1)];
  const auto& nxt = schedule.levels[static_cast<std::size_t>(level)];
  res.param("alphabet_N", lev.alphabet);
  res.param("group_n", lev.sample_size);
  res.param("draws_per_trial", nxt.sample_size);
  CantorSpace space{schedule};

  const std::size_t T = static_cast<std::size_t>(trials);
  std::vector<std::int8_t> tie_slot(T), cover_slot(T), birth_slot(T);
  std::vector<double> mult_slot(T);
  for_each_trial(trials, workers, [&](long long t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    std::vector<LazyProductPoint> pts;
    pts.reserve(static_cast<std::size_t>(nxt.sample_size));
    for (std::int64_t i = 0; i < nxt.sample_size; ++i) pts.push_back(cantor_sample(space, rng));

    Dyadic dmin = Dyadic::one();
    std::size_t at_min = 0;
    bool min_capped = false;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      auto dd = space.distance_flagged(pts[0], pts[i]);
      if (dd.value < dmin) {
        dmin = dd.value;
        at_min = 1;
        min_capped = dd.capped;
      } else if (dd.value == dmin) {
        ++at_min;
        min_capped = min_capped || dd.capped;
      }
    }
    std::size_t need = static_cast<std::size_t>(lev.sample_size - 1);
    tie_slot[static_cast<std::size_t>(t)] =
        dmin.positive && !min_capped && at_min >= need ? 1 : 0;
    mult_slot[static_cast<std::size_t>(t)] = static_cast<double>(at_min);

    std::vector<std::int64_t> counts(static_cast<std::size_t>(lev.alphabet), 0);
    for (const auto& p : pts) ++counts[static_cast<std::size_t>(p.coordinate(level) - 1)];
    bool covered = true;
    for (auto c : counts)
      if (c < lev.sample_size) covered = false;
    cover_slot[static_cast<std::size_t>(t)] = covered ? 1 : 0;

    std::vector<std::int64_t> next_coords;
    next_coords.reserve(pts.size());
    for (const auto& p : pts) next_coords.push_back(p.coordinate(level + 1));
    std::sort(next_coords.begin(), next_coords.end());
    birth_slot[static_cast<std::size_t>(t)] =
        std::adjacent_find(next_coords.begin(), next_coords.end()) == next_coords.end() ? 1 : 0;
  });
  Accumulator tie_acc, cover_acc, birthday_acc, mult_acc;
  for (std::size_t t = 0; t < T; ++t) {
    tie_acc.add(tie_slot[t]);
    cover_acc.add(cover_slot[t]);
    birthday_acc.add(birth_slot[t]);
    mult_acc.add(mult_slot[t]);
  }
  auto tie = tie_acc.finish();
  auto cover = cover_acc.finish();
  auto birth = birthday_acc.finish();
  res.stats.push_back(Stat::estimate("full_tie_frequency", tie));
  res.stats.push_back(Stat::estimate("coverage_frequency", cover));
  res.stats.push_back(Stat::estimate("birthday_frequency", birth));
  res.stats.push_back(Stat::estimate("mean_tie_multiplicity", mult_acc.finish()));
  double delta = schedule.delta.to_double();
  res.checks.push_back(Check{"tie_frequency_at_least_1_minus_delta",
                             tie.mean >= 1.0 - delta - 3.0 * tie.se, tie.mean,
                             1.0 - delta - 3.0 * tie.se, "freq >= 1 - delta - 3*SE"});
  double dk = lev.delta_k.to_double();
  res.checks.push_back(Check{"coverage_subevent", cover.mean >= 1.0 - dk - 3.0 * cover.se,
                             cover.mean, 1.0 - dk - 3.0 * cover.se, "freq >= 1 - delta_k - 3*SE"});
  double dk1 = nxt.delta_k.to_double();
  res.checks.push_back(Check{"birthday_subevent", birth.mean >= 1.0 - dk1 - 3.0 * birth.se,
                             birth.mean, 1.0 - dk1 - 3.0 * birth.se, "freq >= 1 - delta_k - 3*SE"});
  return res;
}

// ---------------------------------------------------------------------------
// eta~ diagnostic.

template <class Dist>
ExperimentResult eta_diagnostic_experiment(const Dist& dist, int n, const std::vector<int>& ks,
                                           long long trials, std::uint64_t seed,
                                           int workers = 1) {
  ExperimentResult res;
  res.experiment = "eta-diagnostic";
  res.param("n", n);
  res.param("trials", trials);
  auto space = dist.space();
  for (int k : ks) {
    std::vector<double> slot(static_cast<std::size_t>(trials));
    for_each_trial(trials, workers, [&, k](long long t) {
      Rng rng(derive_seed(seed ^ static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(t)));
      FiniteSample<double> sample;
      sample.points.resize(static_cast<std::size_t>(n));
      sample.labels.resize(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        double x = dist.sample(rng);
        sample.points[static_cast<std::size_t>(i)] = x;
        sample.labels[static_cast<std::size_t>(i)] = rng.unit() < dist.eta(x) ? 1 : 0;
      }
      double xt = dist.sample(rng);
      auto ns = k_nearest(space, sample.points, xt, k, TieBreakPolicy::uniform(rng.next_u64()));
      double etan = eta_n_from(ns, sample.labels);
      double etat = 0.0;
      for (auto i : ns.indices) etat += dist.eta(sample.points[i]);
      etat /= static_cast<double>(ns.indices.size());
      slot[static_cast<std::size_t>(t)] = (etan - etat) * (etan - etat);
    });
    Accumulator acc;
    for (double v : slot) acc.add(v);
    auto est = acc.finish();
    res.stats.push_back(Stat::estimate("sq_dev_k" + std::to_string(k), est));
    double bound = 1.0 / static_cast<double>(k) + 3.0 * est.se;
    res.checks.push_back(
        Check{"eta_tilde_bound_k" + std::to_string(k), est.mean <= bound, est.mean, bound,
              "E[(eta_n - eta~_n)^2] <= 1/k + 3*SE"});
  }
  return res;
}

// ---------------------------------------------------------------------------
// r_alpha properties on uniform[0,1].

inline ExperimentResult r_alpha_experiment(int n, long long probes, std::uint64_t seed) {
  ExperimentResult res;
  res.experiment = "r-alpha";
  res.param("n", n);
  res.param("probes", probes);
  Rng rng(seed);
  std::vector<double> pts(static_cast<std::size_t>(n));
  for (auto& p : pts) p = rng.unit();
  std::vector<double> sorted = pts;
  std::sort(sorted.begin(), sorted.end());
  // r_alpha over the sorted sample: distance to the ceil(alpha*n)-th nearest
  auto r_alpha_sorted = [&](double x, double alpha) {
    std::size_t need = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(n)));
    if (need == 0) need = 1;
    auto it = std::lower_bound(sorted.begin(), sorted.end(), x);
    std::ptrdiff_t hi = it - sorted.begin(), lo = hi - 1;
    double r = 0.0;
    for (std::size_t c = 0; c < need; ++c) {
      bool take_lo;
      if (lo < 0) take_lo = false;
      else if (hi >= static_cast<std::ptrdiff_t>(sorted.size())) take_lo = true;
      else take_lo = x - sorted[static_cast<std::size_t>(lo)] <=
                     sorted[static_cast<std::size_t>(hi)] - x;
      r = take_lo ? x - sorted[static_cast<std::size_t>(lo--)]
                  : sorted[static_cast<std::size_t>(hi++)] - x;
    }
    return r;
  };

  long long mass_failures = 0;
  for (double alpha : {0.1, 0.25, 0.5, 1.0}) {
    for (long long t = 0; t < probes; ++t) {
      double x = rng.unit();
      double r = r_alpha_sorted(x, alpha);
      std::size_t cnt = 0;
      for (double p : pts)
        if (std::fabs(p - x) <= r) ++cnt;
      double mass = static_cast<double>(cnt) / static_cast<double>(n);
      if (mass < alpha || mass > alpha + 1.0 / static_cast<double>(n)) ++mass_failures;
    }
  }
  res.stats.push_back(Stat::scalar("mass_window_failures", static_cast<double>(mass_failures)));
  res.checks.push_back(Check{"mass_in_window", mass_failures == 0,
                             static_cast<double>(mass_failures), 0.0,
                             "nu(B(x, r_alpha)) in [alpha, alpha + 1/n]"});

  long long lip_failures = 0;
  for (long long t = 0; t < 1000; ++t) {
    double x = rng.unit(), y = rng.unit();
    double rx = r_alpha_sorted(x, 0.25);
    double ry = r_alpha_sorted(y, 0.25);
    if (std::fabs(rx - ry) > std::fabs(x - y) + 1e-12) ++lip_failures;
  }
  res.stats.push_back(Stat::scalar("lipschitz_failures", static_cast<double>(lip_failures)));
  res.checks.push_back(Check{"one_lipschitz", lip_failures == 0,
                             static_cast<double>(lip_failures), 0.0,
                             "|r_a(x) - r_a(y)| <= rho(x,y) + grid step"});

  int ai = 0;
  for (double alpha : {0.01, 0.05}) {
    Accumulator acc;
    for (int rep = 0; rep < 10; ++rep) {
      double y = rng.unit();
      for (long long t = 0; t < 25 * probes; ++t) {
        double x = rng.unit();
        double rx = r_alpha_sorted(x, alpha);
        acc.add(std::fabs(x - y) < rx ? 1.0 : 0.0);
      }
    }
    auto est = acc.finish();
    std::string tag = ai++ == 0 ? "alpha0.01" : "alpha0.05";
    res.stats.push_back(Stat::estimate("reverse_ball_mass_" + tag, est));
    double bound = 2.0 * alpha + 3.0 * est.se;
    res.checks.push_back(Check{"reverse_ball_bound_" + tag, est.mean <= bound, est.mean, bound,
                               "nu(A) <= 2*alpha + 3*SE"});
  }
  return res;
}

// ---------------------------------------------------------------------------
// Exponential concentration of the error around the Bayes error.

struct ConcentrationPoint {
  int n = 0, k = 0;
  double epsilon = 0.0;
  long long outer_trials = 0;
  long long inner_tests = 0;
};

inline std::string format_eps(double e) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", e);
  return std::string(buf);
}

/// Exceedance frequency of { l(g_n) - l* > eps } against
/// 2 exp(-n eps^2 / (18 beta^2)).  The per-trial conditional error l(g_n) is
/// estimated on an inner test set; vacuous parameter points (bound >= 1) are
/// reported, never counted as passes.  The sample is 1-D, so the per-query
/// k-NN walks the sorted order (same output as the brute-force scan).
template <class Dist>
ExperimentResult strong_concentration_experiment(const Dist& dist, double beta,
                                                 const std::vector<ConcentrationPoint>& points,
                                                 std::uint64_t seed) {
  ExperimentResult res;
  res.experiment = "concentration";
  res.param("beta", static_cast<long long>(beta));
  double bayes = dist.bayes_error();
  for (std::size_t pi = 0; pi < points.size(); ++pi) {
    const auto& pt = points[pi];
    double bound = 2.0 * std::exp(-static_cast<double>(pt.n) * pt.epsilon * pt.epsilon /
                                  (18.0 * beta * beta));
    std::string tag = "n" + std::to_string(pt.n) + "_eps" + format_eps(pt.epsilon);
    res.stats.push_back(Stat::scalar("bound_" + tag, bound));
    if (bound >= 1.0) {
      res.checks.push_back(
          Check{"vacuous_" + tag, true, bound, 1.0, "bound >= 1: reported as vacuous, not counted"});
      continue;
    }
    if (pt.inner_tests < static_cast<long long>(9.0 / (pt.epsilon * pt.epsilon)))
      throw std::invalid_argument("strong_concentration_experiment: inner-test budget too small");
    Accumulator acc;
    for (long long t = 0; t < pt.outer_trials; ++t) {
      Rng rng(derive_seed(seed + pi, static_cast<std::uint64_t>(t)));
      std::vector<std::pair<double, std::uint8_t>> train(static_cast<std::size_t>(pt.n));
      for (auto& e : train) {
        e.first = dist.sample(rng);
        e.second = rng.unit() < dist.eta(e.first) ? 1 : 0;
      }
      std::sort(train.begin(), train.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      long long errors = 0;
      for (long long q = 0; q < pt.inner_tests; ++q) {
        double x = dist.sample(rng);
        std::uint8_t y = rng.unit() < dist.eta(x) ? 1 : 0;
        auto it = std::lower_bound(train.begin(), train.end(), x,
                                   [](const auto& e, double v) { return e.first < v; });
        std::ptrdiff_t hi = it - train.begin(), lo = hi - 1;
        int ones = 0;
        for (int c = 0; c < pt.k; ++c) {
          bool take_lo;
          if (lo < 0) take_lo = false;
          else if (hi >= static_cast<std::ptrdiff_t>(train.size())) take_lo = true;
          else take_lo = x - train[static_cast<std::size_t>(lo)].first <=
                         train[static_cast<std::size_t>(hi)].first - x;
          if (take_lo) ones += train[static_cast<std::size_t>(lo--)].second;
          else ones += train[static_cast<std::size_t>(hi++)].second;
        }
        int pred = 2 * ones >= pt.k ? 1 : 0;
        errors += pred != y ? 1 : 0;
      }
      double lhat = static_cast<double>(errors) / static_cast<double>(pt.inner_tests);
      acc.add(lhat - bayes > pt.epsilon ? 1.0 : 0.0);
    }
    auto est = acc.finish();
    res.stats.push_back(Stat::estimate("exceedance_" + tag, est));
    res.checks.push_back(Check{"concentration_" + tag, est.mean <= bound + 3.0 * est.se, est.mean,
                               bound + 3.0 * est.se, "freq <= bound + 3*SE"});
  }
  return res;
}

}  // namespace nkl

#endif
