#include "ls/posttune/evaluate.hpp"

#include <algorithm>
#include <stdexcept>

#include "ls/embed/charseq.hpp"
#include "ls/metrics/edit_distance.hpp"
#include "ls/surrogate/box_pool.hpp"

namespace ls::posttune {

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j = {{"task", to_string(task)}, {"samples", samples}};
  if (task == TaskKind::kEditDistance) {
    j["accuracy"] = accuracy;
    j["ned"] = ned;
    j["ted"] = ted;
    j["char_accuracy"] = char_accuracy;
  } else {
    j["mean_iou"] = mean_iou;
    j["precision"] = precision;
    j["recall"] = recall;
    j["f1"] = f1;
  }
  return j;
}

EvalReport evaluate_texts(const std::vector<std::string>& predicted,
                          const std::vector<std::string>& truth) {
  if (predicted.size() != truth.size()) throw std::invalid_argument("evaluate: size mismatch");
  if (truth.empty()) throw std::invalid_argument("evaluate: empty split");
  EvalReport r;
  r.task = TaskKind::kEditDistance;
  r.samples = truth.size();
  std::size_t exact = 0;
  double ned = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const std::size_t d = metrics::edit_distance(predicted[i], truth[i]);
    const std::size_t longest = std::max(predicted[i].size(), truth[i].size());
    r.ted += d;
    exact += d == 0;
    ned += longest == 0 ? 1.0 : 1.0 - static_cast<double>(d) / static_cast<double>(longest);
  }
  r.accuracy = static_cast<double>(exact) / static_cast<double>(truth.size());
  r.ned = ned / static_cast<double>(truth.size());
  return r;
}

EvalReport evaluate_boxes(const std::vector<metrics::RotatedBox>& predicted,
                          const std::vector<metrics::RotatedBox>& truth, double threshold) {
  if (predicted.size() != truth.size()) throw std::invalid_argument("evaluate: size mismatch");
  if (truth.empty()) throw std::invalid_argument("evaluate: empty split");
  EvalReport r;
  r.task = TaskKind::kIou;
  r.samples = truth.size();
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double iou = metrics::rotated_iou(predicted[i], truth[i]);
    sum += iou;
    hits += iou >= threshold;
  }
  const double n = static_cast<double>(truth.size());
  r.mean_iou = sum / n;
  // One prediction per ground truth: every miss is both a false positive and
  // a false negative.
  r.precision = static_cast<double>(hits) / n;
  r.recall = static_cast<double>(hits) / n;
  r.f1 = r.precision + r.recall > 0.0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

ad::Tensor predict_split(const TaskModel& model, const ad::Tensor& x, std::size_t chunk) {
  ad::NoGradGuard guard;
  const std::size_t n = x.dim(0);
  const std::size_t per_in = x.size() / n;
  std::vector<double> out;
  ad::Shape out_shape;
  for (std::size_t start = 0; start < n; start += chunk) {
    const std::size_t rows = std::min(chunk, n - start);
    ad::Shape in_shape = x.shape();
    in_shape[0] = rows;
    const auto src = x.data().subspan(start * per_in, rows * per_in);
    const ad::Var z = model.predict(ad::constant(ad::Tensor(in_shape, std::vector<double>(src.begin(), src.end()))));
    out.insert(out.end(), z.value().data().begin(), z.value().data().end());
    out_shape = z.shape();
  }
  out_shape[0] = n;
  return ad::Tensor(out_shape, std::move(out));
}

EvalReport evaluate(const TaskModel& model, const ToySplit& split, const metrics::Alphabet& alphabet) {
  if (split.size() == 0) throw std::invalid_argument("evaluate: empty split");
  const ad::Tensor z = predict_split(model, split.x);
  if (model.task() == TaskKind::kIou) {
    return evaluate_boxes(surrogate::tensor_to_boxes(z), split.boxes);
  }
  EvalReport r = evaluate_texts(embed::decode_batch(z, alphabet), split.texts);
  const std::size_t a = z.dim(1), l = z.dim(2);
  std::size_t hits = 0, positions = 0;
  for (std::size_t b = 0; b < split.size(); ++b) {
    const std::string& truth = split.texts[b];
    for (std::size_t pos = 0; pos < truth.size(); ++pos) {
      std::size_t best = 0;
      for (std::size_t s = 1; s < a; ++s) {
        if (z[(b * a + s) * l + pos] > z[(b * a + best) * l + pos]) best = s;
      }
      hits += best == alphabet.index_of(truth[pos]);
      ++positions;
    }
  }
  r.char_accuracy = positions ? static_cast<double>(hits) / static_cast<double>(positions) : 1.0;
  return r;
}

std::vector<double> oracle_targets(TaskKind task, const ad::Tensor& z, const ToySplit& labels,
                                   const metrics::Alphabet& alphabet) {
  std::vector<double> e;
  if (task == TaskKind::kEditDistance) {
    const auto decoded = embed::decode_batch(z, alphabet);
    for (std::size_t i = 0; i < decoded.size(); ++i) {
      e.push_back(static_cast<double>(metrics::edit_distance(decoded[i], labels.texts.at(i))));
    }
  } else {
    const auto boxes = surrogate::tensor_to_boxes(z);
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      e.push_back(1.0 - metrics::rotated_iou(boxes[i], labels.boxes.at(i)));
    }
  }
  return e;
}

}  // namespace ls::posttune
