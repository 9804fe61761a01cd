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

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "nkl/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"nkl: k-nearest-neighbor consistency experiments on general metric spaces"};
  app.get_formatter()->column_width(30);

  bool list = false;
  std::string config_path;
  nkl::RunConfig cfg;
  std::string experiment, delta, policy, out;
  std::uint64_t seed = 0;
  int n = -1, k = -1, depth = -1, workers = -1;
  long long trials = -1;
  double alpha = -1.0, epsilon = -1.0;

  app.add_flag("--list", list, "print the experiment catalog and exit");
  app.add_option("--config", config_path, "flat key=value config file (flags win)");
  app.add_option("--experiment", experiment, "experiment id (see --list)");
  app.add_option("--seed", seed, "master seed (default: NKL_SEED env var, else 12345)");
  app.add_option("--n", n, "sample size");
  app.add_option("--k", k, "number of neighbors (cantor-ties: tie level)");
  app.add_option("--trials", trials, "Monte Carlo trials / test draws");
  app.add_option("--depth", depth, "Davies truncation depth L");
  app.add_option("--delta", delta, "Cantor delta, exact decimal or p/q");
  app.add_option("--alpha", alpha, "fraction parameter in (0,1)");
  app.add_option("--epsilon", epsilon, "error margin for the concentration experiment");
  app.add_option("--policy", policy, "tie-breaking policy: index | uniform");
  app.add_option("--out", out, "output path prefix (writes <out>.csv and <out>.json)");
  app.add_option("--workers", workers, "worker threads for trial-parallel experiments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (list) {
    for (const auto& info : nkl::list_experiments())
      std::cout << info.id << "\t" << info.claim << "\n";
    return 0;
  }

  try {
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw std::runtime_error("cannot read config file: " + config_path);
      std::stringstream ss;
      ss << f.rdbuf();
      cfg = nkl::RunConfig::parse(ss.str());
    }
    if (const char* env = std::getenv("NKL_SEED"); env && app.count("--seed") == 0 &&
                                                   config_path.empty())
      cfg.seed = std::stoull(env);
    // flags override the config file
    if (app.count("--experiment")) cfg.experiment = experiment;
    if (app.count("--seed")) cfg.seed = seed;
    if (app.count("--n")) cfg.n = n;
    if (app.count("--k")) cfg.k = k;
    if (app.count("--trials")) cfg.trials = trials;
    if (app.count("--depth")) cfg.depth = depth;
    if (app.count("--delta")) cfg.delta = delta;
    if (app.count("--alpha")) cfg.alpha = alpha;
    if (app.count("--epsilon")) cfg.epsilon = epsilon;
    if (app.count("--policy")) cfg.policy = policy;
    if (app.count("--out")) cfg.out = out;
    if (app.count("--workers")) cfg.workers = workers;

    if (cfg.experiment.empty()) {
      std::cerr << "error: --experiment is required (or --list)\n";
      return 1;
    }
    int rc = nkl::run(cfg);
    if (rc == 2)
      std::cerr << "one or more declared checks failed; see " << cfg.out << ".json\n";
    return rc;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
