#include "ls/harness/pipelines.hpp"

#include <fstream>

#include "ls/embed/checkpoint.hpp"
#include "ls/harness/charts.hpp"

namespace ls::harness {

namespace fs = std::filesystem;
using posttune::TaskKind;

namespace {

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return nlohmann::json::parse(in);
}

void write_manifest(const fs::path& out_dir, const std::string& pipeline, const ExperimentConfig& config,
                    const std::vector<std::string>& artifacts) {
  write_json(out_dir / kManifestFile, {{"manifest_version", kManifestVersion},
                                       {"pipeline", pipeline},
                                       {"csv_schema_version", kCsvSchemaVersion},
                                       {"config", config.to_json()},
                                       {"seeds", config.seeds().to_json()},
                                       {"artifacts", artifacts}});
}

void save_model(const fs::path& path, const posttune::TaskModel& model, std::uint64_t seed, std::uint64_t step) {
  embed::save_checkpoint(path, model.params(), {model.architecture(), seed, step});
}

std::unique_ptr<posttune::TaskModel> load_model(const fs::path& path, TaskKind expected) {
  const auto header = embed::read_checkpoint_header(path);
  auto model = posttune::make_task_model(header.architecture, header.seed);
  if (model->task() != expected) {
    throw ConfigError("checkpoint " + path.string() + " holds a model for task " + posttune::to_string(model->task()));
  }
  embed::load_checkpoint(path, model->params());
  return model;
}

std::unique_ptr<embed::EmbeddingNet> load_surrogate(const fs::path& path) {
  const auto header = embed::read_checkpoint_header(path);
  auto net = embed::make_embedding(header.architecture, header.seed);
  embed::load_checkpoint(path, net->params());
  return net;
}

surrogate::BatchProducer local_producer(const posttune::TaskModel& model, const posttune::ToyDataset& data,
                                        std::size_t batch_size, std::mt19937_64& rng) {
  return [&model, &data, batch_size, &rng] {
    const auto rows = posttune::sample_indices(data.train.size(), batch_size, rng);
    return posttune::model_pairs(model, data, data.train, rows);
  };
}

}  // namespace

posttune::ToyDataset make_dataset(const ExperimentConfig& config) {
  return config.task == TaskKind::kEditDistance ? posttune::make_string_dataset(config.strings)
                                                : posttune::make_box_dataset(config.boxes);
}

std::unique_ptr<posttune::TaskModel> make_model(const ExperimentConfig& config) {
  const char* kind = config.task == TaskKind::kEditDistance ? "string_recognizer" : "box_regressor";
  return posttune::make_task_model({{"kind", kind}, {"config", config.model}}, config.seeds().model);
}

std::unique_ptr<embed::EmbeddingNet> make_surrogate(const ExperimentConfig& config) {
  const char* kind = config.task == TaskKind::kEditDistance ? "char_cnn" : "box_mlp";
  return embed::make_embedding({{"kind", kind}, {"config", config.surrogate}}, config.seeds().surrogate);
}

surrogate::BoxGenConfig pool_config(const ExperimentConfig& config, const posttune::ToyDataset& data) {
  surrogate::BoxGenConfig c;
  c.labels = data.train.boxes;
  c.bounds = config.generator.bounds;
  c.pool_size = config.generator.pool_size;
  c.bins = config.generator.bins;
  c.max_attempts = config.generator.max_attempts;
  c.seed = config.seeds().pool;
  c.threads = config.threads;
  return c;
}

RandomPairs::RandomPairs(const ExperimentConfig& config, const posttune::ToyDataset& data) {
  if (config.task == TaskKind::kEditDistance) {
    surrogate::StringGenConfig c;
    c.corpus = data.train_words;
    c.max_edits = config.generator.max_edits;
    c.alphabet = data.alphabet;
    c.max_length = data.max_length;
    c.seed = config.seeds().generator;
    strings_.emplace(c);
  } else {
    auto pool = std::make_shared<surrogate::BoxPool>(
        config.generator.pool_path.empty() ? surrogate::build_box_pool(pool_config(config, data))
                                           : surrogate::BoxPool::load(config.generator.pool_path));
    boxes_.emplace(std::move(pool), config.seeds().generator);
  }
}

surrogate::PairBatch RandomPairs::next(std::size_t batch_size) {
  return strings_ ? strings_->next(batch_size) : boxes_->next(batch_size);
}

std::size_t RandomPairs::calls() const { return strings_ ? strings_->calls() : boxes_->calls(); }

surrogate::BoxPool run_build_pool(const ExperimentConfig& config, const fs::path& path) {
  if (config.task != TaskKind::kIou) throw ConfigError("build-pool: requires task ls_iou");
  const auto data = make_dataset(config);
  auto pool = surrogate::build_box_pool(pool_config(config, data));
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  pool.save(path);
  return pool;
}

posttune::PretrainResult run_pretrain(const ExperimentConfig& config, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const auto data = make_dataset(config);
  auto model = make_model(config);
  const auto result = posttune::pretrain_proxy(*model, data, config.pretrain);
  save_model(out_dir / kModelCheckpoint, *model, config.seeds().model, config.pretrain.steps);
  write_json(out_dir / "pretrain.json", {{"steps", config.pretrain.steps},
                                         {"test_proxy_loss", result.test_loss},
                                         {"reached_target", result.reached_target},
                                         {"test", result.test.to_json()}});
  write_manifest(out_dir, "pretrain", config, {kModelCheckpoint, "pretrain.json"});
  return result;
}

nlohmann::json SurrogateRunSummary::to_json() const {
  return {{"steps", steps},
          {"final_abs_err", final_abs_err},
          {"final_penalty", final_penalty},
          {"local_abs_err", local_abs_err}};
}

SurrogateRunSummary run_train_surrogate(const ExperimentConfig& config, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const auto data = make_dataset(config);
  std::unique_ptr<posttune::TaskModel> model;
  if (!config.model_checkpoint.empty()) {
    model = load_model(config.model_checkpoint, config.task);
  } else {
    model = make_model(config);
    posttune::pretrain_proxy(*model, data, config.pretrain);
  }
  auto net = config.surrogate_checkpoint.empty() ? make_surrogate(config) : load_surrogate(config.surrogate_checkpoint);

  surrogate::SurrogateTrainConfig sconf;
  sconf.lr = config.train.surrogate_lr;
  sconf.optimizer = config.train.surrogate_optimizer;
  sconf.mode = config.mode;
  sconf.loss = config.train.loss;
  sconf.seed = config.seed;
  surrogate::SurrogateTrainer trainer(*net, sconf);

  std::mt19937_64 rng(config.seeds().train);
  RandomPairs random(config, data);
  const std::size_t batch = config.train.batch_size;
  const auto log = trainer.train(config.surrogate_steps, local_producer(*model, data, batch, rng),
                                 [&] { return random.next(batch); });

  SurrogateRunSummary summary;
  summary.steps = log.size();
  if (!log.empty()) {
    std::vector<double> err, pen;
    for (const auto& s : log) {
      err.push_back(s.mean_abs_err);
      pen.push_back(s.penalty_term);
    }
    summary.final_abs_err = surrogate::running_mean(err, config.log_window).back();
    summary.final_penalty = surrogate::running_mean(pen, config.log_window).back();
  }
  summary.local_abs_err = posttune::local_approximation_error(*model, *net, data, data.test);

  save_model(out_dir / kModelCheckpoint, *model, config.seeds().model, config.pretrain.steps);
  embed::save_checkpoint(out_dir / kSurrogateCheckpoint, net->params(),
                         {net->architecture(), config.seeds().surrogate, log.size()});
  surrogate::write_surrogate_csv(out_dir / kSurrogateLog, log, config.mode, config.seed);
  write_json(out_dir / "surrogate_summary.json", summary.to_json());
  write_manifest(out_dir, "train-surrogate", config,
                 {kModelCheckpoint, kSurrogateCheckpoint, kSurrogateLog, "surrogate_summary.json"});
  return summary;
}

posttune::RunReport run_post_tune(const ExperimentConfig& config, const fs::path& out_dir) {
  if (config.model_checkpoint.empty()) {
    throw ConfigError("post-tune: model_checkpoint (a proxy-pretrained model) is required");
  }
  fs::create_directories(out_dir);
  const auto data = make_dataset(config);
  auto model = load_model(config.model_checkpoint, config.task);
  auto net = config.surrogate_checkpoint.empty() ? make_surrogate(config) : load_surrogate(config.surrogate_checkpoint);
  RandomPairs random(config, data);
  const std::size_t batch = config.train.batch_size;
  auto report = posttune::posttune_ls(*model, *net, data, config.train, [&] { return random.next(batch); });

  save_model(out_dir / kModelCheckpoint, *model, config.seeds().model,
             config.train.epochs * config.train.model_steps);
  embed::save_checkpoint(out_dir / kSurrogateCheckpoint, net->params(),
                         {net->architecture(), config.seeds().surrogate, report.surrogate_log.size()});
  surrogate::write_surrogate_csv(out_dir / kSurrogateLog, report.surrogate_log, config.mode, config.seed);
  write_json(out_dir / kRunReport, report.to_json(/*include_wall_clock=*/false));
  write_json(out_dir / "timing.json", {{"wall_clock_seconds", report.wall_clock_seconds}});
  write_manifest(out_dir, "post-tune", config,
                 {kModelCheckpoint, kSurrogateCheckpoint, kSurrogateLog, kRunReport, "timing.json"});
  return report;
}

nlohmann::json read_manifest(const fs::path& run_dir) {
  const fs::path path = run_dir / kManifestFile;
  if (!fs::exists(path)) throw ConfigError("report: no " + std::string(kManifestFile) + " in " + run_dir.string());
  return read_json(path);
}

ReportOutcome run_report(const fs::path& run_dir, bool eval_local) {
  const auto manifest = read_manifest(run_dir);
  const int csv_version = manifest.value("csv_schema_version", 0);
  if (csv_version != kCsvSchemaVersion) {
    throw ConfigError("report: run uses CSV schema version " + std::to_string(csv_version) + ", this build reads " +
                      std::to_string(kCsvSchemaVersion));
  }
  const auto config = ExperimentConfig::from_json(manifest.at("config"));
  ReportOutcome outcome;

  if (fs::exists(run_dir / kSurrogateLog)) {
    const auto log = surrogate::read_surrogate_csv(run_dir / kSurrogateLog);
    outcome.csv_rows = log.size();
    CurveSeries err{"|e_hat - e|", {}, config.log_window};
    CurveSeries pen{"(|grad| - 1)^2", {}, config.log_window};
    for (const auto& s : log) {
      err.points.push_back({static_cast<double>(s.step), s.mean_abs_err});
      pen.points.push_back({static_cast<double>(s.step), s.penalty_term});
    }
    const std::string mode = surrogate::to_string(config.mode);
    const fs::path err_svg = run_dir / "approximation_error.svg";
    write_svg(err_svg, {"Surrogate approximation error (" + mode + ")", "surrogate step",
                        "running mean |e_hat - e|", {err}});
    const fs::path pen_svg = run_dir / "penalty.svg";
    write_svg(pen_svg, {"Gradient penalty (" + mode + ")", "surrogate step", "running mean penalty", {pen}});
    outcome.charts = {err_svg, pen_svg};
  }

  if (fs::exists(run_dir / kRunReport)) {
    const auto report = read_json(run_dir / kRunReport);
    const auto& epochs = report.at("epochs");
    const bool text = config.task == TaskKind::kEditDistance;
    ChartSpec chart{text ? "Test total edit distance per epoch" : "Test mean IoU per epoch", "epoch",
                    text ? "TED" : "mean IoU", {}};
    CurveSeries metric{"post-tuned", {}, 1};
    CurveSeries baseline{"baseline", {}, 1};
    const char* key = text ? "ted" : "mean_iou";
    const double base = report.at("baseline").at(key).get<double>();
    const auto& tests = epochs.at("test");
    baseline.points.push_back({0.0, base});
    metric.points.push_back({0.0, base});
    for (std::size_t i = 0; i < tests.size(); ++i) {
      metric.points.push_back({static_cast<double>(i + 1), tests[i].at(key).get<double>()});
      baseline.points.push_back({static_cast<double>(i + 1), base});
    }
    chart.series = {metric, baseline};
    const fs::path svg = run_dir / "epoch_metric.svg";
    write_svg(svg, chart);
    outcome.charts.push_back(svg);
  }

  if (eval_local) {
    const auto data = make_dataset(config);
    auto model = load_model(run_dir / kModelCheckpoint, config.task);
    auto net = load_surrogate(run_dir / kSurrogateCheckpoint);
    outcome.local_abs_err = posttune::local_approximation_error(*model, *net, data, data.test);
  }
  return outcome;
}

}  // namespace ls::harness
