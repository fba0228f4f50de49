// Copyright 2026 The vlab Authors.
//
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

// Command line driver for the experiment suites.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vlab.hpp"

namespace {

struct Overrides {
  std::string config;
  std::vector<std::pair<std::string, std::string>> settings;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config, "flat key = value config file");
  auto setting = [&](const char* flag, const char* key, const char* help) {
    sub->add_option_function<std::string>(
        flag, [&o, key](const std::string& v) { o.settings.emplace_back(key, v); }, help);
  };
  setting("--depth", "depth", "depth N");
  setting("--radix", "radix", "comma list of radices, the last repeats");
  setting("--fiber-dim", "fiber_dim", "fiber dimension d");
  setting("--system", "system", "vilenkin-characters, m-adic or corrupted");
  setting("--trials", "trials", "random trials per claim");
  setting("--seed", "seed", "master seed");
  setting("--out", "out", "output directory");
  setting("--budget", "budget", "maximum M_N * d");
  setting("--lacunary", "lacunary", "\"default\" or a comma list of integers");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vilenkin-type systems with operator-valued coefficients: experiment harness"};
  app.require_subcommand(1);
  Overrides o;
  std::string chosen;
  for (const auto& name : vlab::suite_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " suite");
    add_common(sub, o);
    sub->callback([&chosen, name] { chosen = name; });
  }
  CLI11_PARSE(app, argc, argv);

  try {
    vlab::RunConfig cfg;
    if (!o.config.empty()) vlab::load_config_file(o.config, cfg);
    for (const auto& [k, v] : o.settings) vlab::apply_setting(cfg, k, v);
    const auto results = vlab::run_suite(cfg, chosen);
    bool ok = true;
    for (const auto& r : results) {
      std::cout << r.suite << ": " << (r.passed ? "PASS" : "FAIL") << '\n';
      for (const auto& f : r.failures) std::cout << "  " << f << '\n';
      for (const auto& f : r.files) std::cout << "  wrote " << f << '\n';
      ok = ok && r.passed;
    }
    return ok ? 0 : 1;
  } catch (const vlab::BudgetError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const vlab::PreconditionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
