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

#ifndef NKL_CLI_HPP
#define NKL_CLI_HPP

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "nkl/report.hpp"

namespace nkl {

struct ExperimentInfo {
  std::string id;
  std::string claim;  // the named result the experiment checks
};

/// Stable, sorted catalog.
inline std::vector<ExperimentInfo> list_experiments() {
  return {
      {"bayes-error", "Monte Carlo Bayes error E[min(eta, 1-eta)] against the closed form"},
      {"cantor-ties",
       "Cantor product construction: full essential ties for the k-NN of X1 w.p. >= 1 - delta"},
      {"concentration",
       "no-ties concentration: P(err - bayes > eps) <= 2 exp(-n eps^2 / (18 beta^2)) at metric "
       "dimension beta"},
      {"consistency-sweep",
       "plug-in excess bound err - bayes <= 2 E|eta - eta_n| per row; error trend toward the "
       "Bayes error"},
      {"cover-hart", "Cover-Hart shrinkage: eps_kNN quantiles fall as n grows with k/n -> 0"},
      {"davies-inconsistency",
       "Davies two-measure space: tie-regime label mean 3/7; k-NN error approaches 0.6 while the "
       "Bayes error is <= 0.4"},
      {"davies-measures",
       "exact (p_n, alpha_n, beta_n) chain and the equal-ball identity mu_a = mu_b on radius < 1"},
      {"eta-diagnostic", "neighbor-average diagnostic E[(eta_n - eta~_n)^2] <= 1/k"},
      {"harmonic-indegree",
       "uniform ties on the ultrametric chain: E[in-degree of x1] = H_{n-1} (degree bound fails "
       "under ties)"},
      {"r-alpha",
       "r_alpha quantile radius: ball mass alpha, 1-Lipschitz continuity, reverse-ball mass <= "
       "beta*alpha"},
      {"stone-bound",
       "no-ties degree bound: a point serves as k-NN of at most (k+1)*beta sample points"},
      {"t-set-bound", "scale-bounded census bound #T <= beta*m/alpha"},
  };
}

inline ExperimentResult run_experiment(const RunConfig& cfg) {
  const std::string& id = cfg.experiment;
  std::uint64_t seed = cfg.seed;
  int workers = cfg.workers;

  if (id == "harmonic-indegree") {
    int n = cfg.n > 0 ? cfg.n : 100;
    long long trials = cfg.trials > 0 ? cfg.trials : 10000;
    return harmonic_indegree_experiment(n, trials, seed, workers);
  }
  if (id == "stone-bound") {
    long long trials = cfg.trials > 0 ? cfg.trials : 10000;
    return stone_bound_experiment({1, 3, 5, 10}, trials, seed, workers);
  }
  if (id == "t-set-bound") {
    long long trials = cfg.trials > 0 ? cfg.trials : 10000;
    return t_set_bound_experiment({0.1, 0.25, 0.5}, trials, seed, workers);
  }
  if (id == "davies-inconsistency") {
    if (cfg.policy_kind() != TieBreakPolicy::Kind::UniformRandom)
      throw std::invalid_argument(
          "davies-inconsistency requires --policy uniform (ties must be broken uniformly on the "
          "sphere)");
    DaviesRunConfig dc;
    dc.depth = cfg.depth;
    dc.n = cfg.n > 0 ? cfg.n : 2000;
    dc.k = cfg.k > 0 ? cfg.k : 40;
    if (dc.k > dc.n)
      throw std::invalid_argument("precondition violated: k must satisfy 1 <= k <= n");
    dc.test_draws = cfg.trials > 0 ? cfg.trials : 10000;
    return davies_inconsistency_experiment(dc, seed, workers);
  }
  if (id == "davies-measures") {
    long long draws = cfg.trials > 0 ? cfg.trials : 100000;
    return davies_measures_experiment(cfg.depth, draws, seed);
  }
  if (id == "cantor-ties") {
    Rational delta = Rational::from_string(cfg.delta);
    int level = cfg.k > 0 ? cfg.k : 1;
    auto schedule = build_cantor_schedule(delta, level + 1);
    long long trials = cfg.trials > 0 ? cfg.trials : 2000;
    return cantor_ties_experiment(schedule, level, trials, seed, workers);
  }
  if (id == "consistency-sweep") {
    auto dist = build_interval_distribution_linear();
    long long trials = cfg.trials > 0 ? cfg.trials : 20000;
    std::vector<int> ns{250, 1000, 4000};
    if (cfg.n > 0) ns = {cfg.n / 16, cfg.n / 4, cfg.n};
    std::vector<int> ks;
    for (int n : ns)
      ks.push_back(cfg.k > 0 ? cfg.k
                             : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n)))));
    for (std::size_t i = 0; i < ns.size(); ++i)
      if (ks[i] > ns[i])
        throw std::invalid_argument("precondition violated: k must satisfy 1 <= k <= n");
    return consistency_sweep(dist, ns, ks, trials, cfg.policy_kind(), seed, workers);
  }
  if (id == "eta-diagnostic") {
    auto dist = build_interval_distribution_linear();
    int n = cfg.n > 0 ? cfg.n : 500;
    long long trials = cfg.trials > 0 ? cfg.trials : 10000;
    std::vector<int> ks{10, 25, 100};
    if (cfg.k > 0) ks = {cfg.k};
    for (int k : ks)
      if (k > n) throw std::invalid_argument("precondition violated: k must satisfy 1 <= k <= n");
    return eta_diagnostic_experiment(dist, n, ks, trials, seed, workers);
  }
  if (id == "cover-hart") {
    long long draws = cfg.trials > 0 ? cfg.trials : 500;
    return cover_hart_full_experiment(cfg.depth, draws, seed);
  }
  if (id == "r-alpha") {
    int n = cfg.n > 0 ? cfg.n : 2000;
    long long probes = cfg.trials > 0 ? cfg.trials : 200;
    return r_alpha_experiment(n, probes, seed);
  }
  if (id == "concentration") {
    auto dist = build_interval_distribution_linear();
    std::vector<ConcentrationPoint> pts;
    pts.push_back(ConcentrationPoint{2000, 45, 0.1, 0, 2000});  // vacuous bound, reported
    int n = cfg.n > 0 ? cfg.n : 100000;
    int k = cfg.k > 0 ? cfg.k : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
    if (k > n) throw std::invalid_argument("precondition violated: k must satisfy 1 <= k <= n");
    long long outer = cfg.trials > 0 ? cfg.trials : 200;
    pts.push_back(ConcentrationPoint{n, k, cfg.epsilon, outer, 2000});
    return strong_concentration_experiment(dist, 2.0, pts, seed);
  }
  if (id == "bayes-error") {
    auto dist = build_interval_distribution_linear();
    long long trials = cfg.trials > 0 ? cfg.trials : 100000;
    auto est = bayes_error_mc(dist, trials, seed);
    ExperimentResult res;
    res.experiment = "bayes-error";
    res.param("trials", trials);
    res.stats.push_back(Stat::estimate("bayes_error_mc", est));
    res.stats.push_back(Stat::scalar("bayes_error_oracle", dist.bayes_error()));
    res.checks.push_back(Check{"bayes_error_matches_oracle",
                               std::fabs(est.mean - dist.bayes_error()) <= 3.0 * est.se,
                               est.mean - dist.bayes_error(), 3.0 * est.se, "|obs - 1/4| <= 3*SE"});
    return res;
  }
  throw std::invalid_argument("unknown experiment id: " + id);
}

/// Runs the configured experiment, writes <out>.csv and <out>.json, and maps
/// the outcome to the exit status: 0 all checks pass, 2 a check failed,
/// 1 usage/config error (thrown before this returns).
inline int run(const RunConfig& cfg) {
  ExperimentResult res = run_experiment(cfg);
  std::string csv = result_csv(res);
  nlohmann::json summary = result_json(res, cfg.seed);
  std::string err;
  if (!validate_against_schema(summary, summary_schema(), &err))
    throw std::logic_error("summary does not validate against the shipped schema: " + err);
  {
    std::ofstream fc(cfg.out + ".csv", std::ios::binary);
    if (!fc) throw std::runtime_error("cannot write output file: " + cfg.out + ".csv");
    fc << csv;
  }
  {
    std::ofstream fj(cfg.out + ".json", std::ios::binary);
    if (!fj) throw std::runtime_error("cannot write output file: " + cfg.out + ".json");
    fj << summary.dump(2) << "\n";
  }
  return res.passed() ? 0 : 2;
}

}  // namespace nkl

#endif
