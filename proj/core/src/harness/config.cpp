#include "ls/harness/config.hpp"

#include <fstream>
#include <set>

#include "ls/embed/embedding.hpp"

namespace ls::harness {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

posttune::StringDatasetConfig strings_from_json(const nlohmann::json& j, posttune::StringDatasetConfig c) {
  reject_unknown(j, {"corpus", "letters", "max_length", "train_size", "test_size", "disjoint_words",
                     "test_word_fraction", "swap_prob", "noise"},
                 "dataset");
  c.corpus = j.value("corpus", c.corpus);
  if (j.contains("letters")) c.alphabet = metrics::Alphabet(j.at("letters").get<std::string>());
  c.max_length = j.value("max_length", c.max_length);
  c.train_size = j.value("train_size", c.train_size);
  c.test_size = j.value("test_size", c.test_size);
  c.disjoint_words = j.value("disjoint_words", c.disjoint_words);
  c.test_word_fraction = j.value("test_word_fraction", c.test_word_fraction);
  c.swap_prob = j.value("swap_prob", c.swap_prob);
  c.noise = j.value("noise", c.noise);
  return c;
}

posttune::BoxDatasetConfig boxes_from_json(const nlohmann::json& j, posttune::BoxDatasetConfig c) {
  reject_unknown(j, {"label_count", "center_lo", "center_hi", "min_size", "max_size", "max_aspect", "train_size",
                     "test_size", "center_jitter", "log_size_jitter", "angle_jitter"},
                 "dataset");
  c.labels.count = j.value("label_count", c.labels.count);
  c.labels.center_lo = j.value("center_lo", c.labels.center_lo);
  c.labels.center_hi = j.value("center_hi", c.labels.center_hi);
  c.labels.min_size = j.value("min_size", c.labels.min_size);
  c.labels.max_size = j.value("max_size", c.labels.max_size);
  c.labels.max_aspect = j.value("max_aspect", c.labels.max_aspect);
  c.train_size = j.value("train_size", c.train_size);
  c.test_size = j.value("test_size", c.test_size);
  c.center_jitter = j.value("center_jitter", c.center_jitter);
  c.log_size_jitter = j.value("log_size_jitter", c.log_size_jitter);
  c.angle_jitter = j.value("angle_jitter", c.angle_jitter);
  return c;
}

GeneratorConfig generator_from_json(const nlohmann::json& j, GeneratorConfig c, const std::filesystem::path& base) {
  reject_unknown(j, {"max_edits", "center_shift", "log_scale", "angle", "pool_size", "bins", "max_attempts",
                     "pool_path"},
                 "generator");
  c.max_edits = j.value("max_edits", c.max_edits);
  c.bounds.center_shift = j.value("center_shift", c.bounds.center_shift);
  c.bounds.log_scale = j.value("log_scale", c.bounds.log_scale);
  c.bounds.angle = j.value("angle", c.bounds.angle);
  c.pool_size = j.value("pool_size", c.pool_size);
  c.bins = j.value("bins", c.bins);
  c.max_attempts = j.value("max_attempts", c.max_attempts);
  if (j.contains("pool_path")) c.pool_path = resolve(j.at("pool_path").get<std::string>(), base);
  return c;
}

nlohmann::json merge(nlohmann::json base, const nlohmann::json& overrides) {
  base.merge_patch(overrides);
  return base;
}

}  // namespace

Seeds Seeds::derive(std::uint64_t seed) {
  Seeds s;
  std::uint64_t state = seed;
  for (std::uint64_t* slot : {&s.dataset, &s.model, &s.surrogate, &s.generator, &s.pool, &s.pretrain, &s.train}) {
    state = splitmix64(state);
    *slot = state;
  }
  return s;
}

nlohmann::json Seeds::to_json() const {
  return {{"dataset", dataset},   {"model", model}, {"surrogate", surrogate}, {"generator", generator},
          {"pool", pool},         {"pretrain", pretrain}, {"train", train}};
}

nlohmann::json to_json(const posttune::StringDatasetConfig& c) {
  nlohmann::json j = {{"letters", c.alphabet.letters()},
                      {"max_length", c.max_length},
                      {"train_size", c.train_size},
                      {"test_size", c.test_size},
                      {"disjoint_words", c.disjoint_words},
                      {"test_word_fraction", c.test_word_fraction},
                      {"swap_prob", c.swap_prob},
                      {"noise", c.noise}};
  if (!c.corpus.empty()) j["corpus"] = c.corpus;
  return j;
}

nlohmann::json to_json(const posttune::BoxDatasetConfig& c) {
  return {{"label_count", c.labels.count},     {"center_lo", c.labels.center_lo},
          {"center_hi", c.labels.center_hi},   {"min_size", c.labels.min_size},
          {"max_size", c.labels.max_size},     {"max_aspect", c.labels.max_aspect},
          {"train_size", c.train_size},        {"test_size", c.test_size},
          {"center_jitter", c.center_jitter},  {"log_size_jitter", c.log_size_jitter},
          {"angle_jitter", c.angle_jitter}};
}

ExperimentConfig ExperimentConfig::defaults(posttune::TaskKind task) {
  ExperimentConfig c;
  c.task = task;
  if (task == posttune::TaskKind::kEditDistance) {
    c.model = posttune::StringRecognizerConfig{}.to_json();
    c.surrogate = embed::CharCnnConfig::toy().to_json();
  } else {
    c.model = posttune::BoxRegressorConfig{}.to_json();
    c.surrogate = embed::BoxMlpConfig{}.to_json();
  }
  c.apply_seed(0);
  return c;
}

std::string ExperimentConfig::task_name() const { return posttune::to_string(task); }

void ExperimentConfig::apply_seed(std::uint64_t new_seed) {
  seed = new_seed;
  const Seeds s = seeds();
  strings.seed = s.dataset;
  boxes.seed = s.dataset;
  boxes.labels.seed = s.dataset ^ 0x5bd1e995ULL;
  pretrain.seed = s.pretrain;
  train.seed = s.train;
  train.mode = mode;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  try {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    reject_unknown(j, {"version", "task", "mode", "seed", "threads", "out", "dataset", "generator", "model",
                       "surrogate", "surrogate_steps", "log_window", "pretrain", "train", "model_checkpoint",
                       "surrogate_checkpoint"},
                   "config");
    if (!j.contains("version")) throw ConfigError("config: missing required 'version'");
    const int version = j.at("version").get<int>();
    if (version != kConfigVersion) {
      throw ConfigError("config: unsupported version " + std::to_string(version) + " (expected " +
                        std::to_string(kConfigVersion) + ")");
    }
    if (!j.contains("task")) throw ConfigError("config: missing required 'task'");
    ExperimentConfig c = defaults(posttune::parse_task(j.at("task").get<std::string>()));
    c.mode = surrogate::parse_mode(j.value("mode", surrogate::to_string(c.mode)));
    c.threads = j.value("threads", c.threads);
    if (j.contains("out")) c.out = resolve(j.at("out").get<std::string>(), base_dir);
    const nlohmann::json empty = nlohmann::json::object();
    if (c.task == posttune::TaskKind::kEditDistance) {
      c.strings = strings_from_json(j.value("dataset", empty), c.strings);
    } else {
      c.boxes = boxes_from_json(j.value("dataset", empty), c.boxes);
    }
    c.generator = generator_from_json(j.value("generator", empty), c.generator, base_dir);
    c.model = merge(c.model, j.value("model", empty));
    c.surrogate = merge(c.surrogate, j.value("surrogate", empty));
    c.surrogate_steps = j.value("surrogate_steps", c.surrogate_steps);
    c.log_window = j.value("log_window", c.log_window);
    c.pretrain = posttune::PretrainConfig::from_json(merge(c.pretrain.to_json(), j.value("pretrain", empty)));
    const nlohmann::json train = j.value("train", empty);
    if (train.contains("mode") || train.contains("seed")) {
      throw ConfigError("train: 'mode' and 'seed' are set at the top level");
    }
    c.train = posttune::TrainConfig::from_json(merge(c.train.to_json(), train));
    if (j.contains("model_checkpoint")) {
      c.model_checkpoint = resolve(j.at("model_checkpoint").get<std::string>(), base_dir);
    }
    if (j.contains("surrogate_checkpoint")) {
      c.surrogate_checkpoint = resolve(j.at("surrogate_checkpoint").get<std::string>(), base_dir);
    }
    c.apply_seed(j.value("seed", c.seed));
    c.validate();
    return c;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config: " + path.string() + ": " + e.what());
  }
  return from_json(j, path.parent_path());
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json train_j = train.to_json();
  train_j.erase("mode");
  train_j.erase("seed");
  nlohmann::json pretrain_j = pretrain.to_json();
  pretrain_j.erase("seed");
  nlohmann::json j = {
      {"version", version},
      {"task", task_name()},
      {"mode", surrogate::to_string(mode)},
      {"seed", seed},
      {"threads", threads},
      {"out", out.string()},
      {"dataset", task == posttune::TaskKind::kEditDistance ? harness::to_json(strings) : harness::to_json(boxes)},
      {"generator",
       {{"max_edits", generator.max_edits},
        {"center_shift", generator.bounds.center_shift},
        {"log_scale", generator.bounds.log_scale},
        {"angle", generator.bounds.angle},
        {"pool_size", generator.pool_size},
        {"bins", generator.bins},
        {"max_attempts", generator.max_attempts}}},
      {"model", model},
      {"surrogate", surrogate},
      {"surrogate_steps", surrogate_steps},
      {"log_window", log_window},
      {"pretrain", pretrain_j},
      {"train", train_j}};
  if (!generator.pool_path.empty()) j["generator"]["pool_path"] = generator.pool_path.string();
  if (!model_checkpoint.empty()) j["model_checkpoint"] = model_checkpoint.string();
  if (!surrogate_checkpoint.empty()) j["surrogate_checkpoint"] = surrogate_checkpoint.string();
  return j;
}

void ExperimentConfig::validate() const {
  try {
    if (threads == 0) throw ConfigError("config: threads must be positive");
    if (log_window == 0) throw ConfigError("config: log_window must be positive");
    if (task == posttune::TaskKind::kEditDistance) {
      strings.validate();
      posttune::StringRecognizerConfig::from_json(model);
      const auto net = embed::CharCnnConfig::from_json(surrogate);
      if (net.alphabet_size != strings.alphabet.size() || net.max_length != strings.max_length) {
        throw ConfigError("config: surrogate input shape does not match the dataset alphabet/length");
      }
      if (generator.max_edits == 0) throw ConfigError("generator: max_edits must be positive");
    } else {
      boxes.validate();
      posttune::BoxRegressorConfig::from_json(model);
      embed::BoxMlpConfig::from_json(surrogate);
      if (generator.bins == 0 || generator.pool_size < generator.bins) {
        throw ConfigError("generator: pool_size must be at least the bin count");
      }
    }
    pretrain.validate();
    train.validate();
    for (const auto& path : {generator.pool_path, model_checkpoint, surrogate_checkpoint}) {
      if (!path.empty() && !std::filesystem::exists(path)) {
        throw ConfigError("config: referenced file does not exist: " + path.string());
      }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

}  // namespace ls::harness
