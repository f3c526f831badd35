#include <algorithm>
#include <chrono>
#include <cstdio>
#include <exception>

#include <CLI11.hpp>

#include "criteria.hpp"

namespace {

using namespace ls::acceptance;

struct Criterion {
  int id;
  const char* name;
  Outcome (*run)(const Context&);
  double max_seconds;  // 0: no stated limit
};

const Criterion kCriteria[] = {
    {1, "autodiff correctness", autodiff_correctness, 60},
    {2, "edit-distance oracle", edit_distance_oracle, 60},
    {3, "rotated-IoU oracle", rotated_iou_oracle, 300},
    {4, "surrogate approximation", surrogate_approximation, 600},
    {5, "penalty behavior", penalty_behavior, 600},
    {6, "data-source ordering", data_source_ordering, 900},
    {7, "LS-ED post-tuning gain", ed_posttune_gain, 900},
    {8, "LS-IoU ablation ordering", iou_ablation_ordering, 900},
    {9, "determinism", determinism, 0},
    {10, "pseudometric properties", pseudometric_properties, 60},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> selected;
  std::string work_dir = "acceptance_runs";
  app.add_option("--criterion", selected, "Criteria to run (default: all)")->check(CLI::Range(1, 10));
  app.add_option("--work-dir", work_dir, "Directory for run artifacts");
  CLI11_PARSE(app, argc, argv);

  const Context ctx{work_dir};
  std::filesystem::create_directories(ctx.work_dir);
  bool all_pass = true;
  for (const Criterion& c : kCriteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run(ctx);
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.max_seconds > 0 && seconds > c.max_seconds) {
      outcome.pass = false;
      outcome.detail += " (over the " + std::to_string(static_cast<int>(c.max_seconds)) + " s budget)";
    }
    std::printf("criterion %d (%s): %s  %s  [%.1f s]\n", c.id, c.name, outcome.pass ? "PASS" : "FAIL",
                outcome.detail.c_str(), seconds);
    std::fflush(stdout);
    all_pass = all_pass && outcome.pass;
  }
  return all_pass ? 0 : 1;
}
