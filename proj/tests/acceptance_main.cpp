#include <iostream>

#include "CLI11.hpp"
#include "vou/acceptance.hpp"

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int only = 0;
  std::string suite = "full";
  vou::AcceptanceOptions opts;
  app.add_option("--only", only, "run a single criterion")->check(CLI::Range(1, vou::kCriterionCount));
  app.add_option("--suite", suite, "full or fast")->check(CLI::IsMember({"full", "fast"}));
  app.add_option("--seed", opts.seed, "master seed");
  app.add_option("--threads", opts.threads, "worker threads, 0 = all cores");
  CLI11_PARSE(app, argc, argv);

  const std::vector<int> ids = only ? std::vector<int>{only} : vou::suite_criteria(vou::suite_from_string(suite));
  bool ok = true;
  for (int id : ids) {
    const auto r = vou::run_criterion(id, opts);
    std::cout << vou::format_result_line(r) << std::endl;
    ok = ok && r.passed;
  }
  return ok ? 0 : 3;
}
