#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ls/metrics/geometry.hpp"
#include "ls/posttune/dataset.hpp"
#include "ls/posttune/task_model.hpp"

namespace ls::posttune {

struct EvalReport {
  TaskKind task = TaskKind::kEditDistance;
  std::size_t samples = 0;
  // LS-ED
  double accuracy = 0.0;        // exact-match rate
  double ned = 0.0;             // mean of 1 - ED / max(len)
  std::size_t ted = 0;          // total edit distance
  double char_accuracy = 0.0;   // per-position argmax hits within the label length
  // LS-IoU
  double mean_iou = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  nlohmann::json to_json() const;
};

EvalReport evaluate_texts(const std::vector<std::string>& predicted,
                          const std::vector<std::string>& truth);
/// Each prediction is matched to its own ground truth iff IoU >= threshold.
EvalReport evaluate_boxes(const std::vector<metrics::RotatedBox>& predicted,
                          const std::vector<metrics::RotatedBox>& truth, double threshold = 0.5);

/// Runs the model over the split in chunks without recording a graph.
ad::Tensor predict_split(const TaskModel& model, const ad::Tensor& x, std::size_t chunk = 256);

/// Throws std::invalid_argument on an empty split.
EvalReport evaluate(const TaskModel& model, const ToySplit& split, const metrics::Alphabet& alphabet);

/// Oracle metric values e(z, y) used as surrogate targets: edit distance of the
/// argmax decode for LS-ED, 1 - IoU for LS-IoU.
std::vector<double> oracle_targets(TaskKind task, const ad::Tensor& z, const ToySplit& labels,
                                   const metrics::Alphabet& alphabet);

}  // namespace ls::posttune
