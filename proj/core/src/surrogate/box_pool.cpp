#include "ls/surrogate/box_pool.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <thread>

namespace ls::surrogate {

using metrics::RotatedBox;

namespace {

constexpr char kMagic[4] = {'L', 'S', 'P', 'L'};
constexpr std::uint32_t kPoolVersion = 1;
constexpr std::uint64_t kChunk = 4096;

template <typename T>
void write_le(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little, "pool I/O assumes a little-endian host");
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw std::runtime_error("box pool: truncated file");
  }
  return value;
}

std::string join_counts(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::vector<BoxPairRecord> draw_chunk(const BoxGenConfig& config, std::uint64_t chunk,
                                      std::uint64_t count) {
  std::seed_seq seq{config.seed, chunk};
  std::mt19937_64 rng(seq);
  std::uniform_int_distribution<std::size_t> pick(0, config.labels.size() - 1);
  std::vector<BoxPairRecord> out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const RotatedBox& y = config.labels[pick(rng)];
    const RotatedBox z = perturb_box(y, config.bounds, rng);
    out.push_back({z, y, metrics::rotated_iou(z, y)});
  }
  return out;
}

}  // namespace

void BoxLabelConfig::validate() const {
  if (count == 0) throw std::invalid_argument("box labels: count must be positive");
  if (!(center_lo <= center_hi) || !(min_size > 0.0) || !(min_size <= max_size) ||
      !(max_aspect >= 1.0)) {
    throw std::invalid_argument("box labels: inconsistent ranges");
  }
}

RotatedBox random_label_box(const BoxLabelConfig& config, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> center(config.center_lo, config.center_hi);
  std::uniform_real_distribution<double> size(config.min_size, config.max_size);
  std::uniform_real_distribution<double> log_aspect(0.0, std::log(config.max_aspect));
  std::uniform_real_distribution<double> angle(-std::numbers::pi / 2, std::numbers::pi / 2);
  const double cx = center(rng), cy = center(rng);
  const double longer = size(rng);
  const double shorter = longer / std::exp(log_aspect(rng));
  const bool wide = std::bernoulli_distribution(0.5)(rng);
  return RotatedBox::from_angle(cx, cy, wide ? longer : shorter, wide ? shorter : longer, angle(rng));
}

std::vector<RotatedBox> random_label_boxes(const BoxLabelConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  std::vector<RotatedBox> out;
  out.reserve(config.count);
  for (std::size_t i = 0; i < config.count; ++i) out.push_back(random_label_box(config, rng));
  return out;
}

RotatedBox perturb_box(const RotatedBox& box, const PerturbBounds& bounds, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0), sym(-1.0, 1.0);
  const double k = unit(rng);
  const double m = std::min(box.w, box.h);
  const double dx = k * bounds.center_shift * m * sym(rng);
  const double dy = k * bounds.center_shift * m * sym(rng);
  const double sw = std::exp(k * bounds.log_scale * sym(rng));
  const double sh = std::exp(k * bounds.log_scale * sym(rng));
  const double da = k * bounds.angle * sym(rng);
  return RotatedBox::from_angle(box.cx + dx, box.cy + dy, box.w * sw, box.h * sh, box.angle() + da);
}

void BoxGenConfig::validate() const {
  if (labels.empty()) throw std::invalid_argument("box generator: empty label pool");
  if (bins == 0) throw std::invalid_argument("box generator: bin count must be positive");
  if (pool_size < bins) throw std::invalid_argument("box generator: pool size smaller than bin count");
  if (!(bounds.center_shift >= 0.0) || !(bounds.log_scale >= 0.0) || !(bounds.angle >= 0.0)) {
    throw std::invalid_argument("box generator: perturbation bounds must be non-negative");
  }
  if (threads == 0) throw std::invalid_argument("box generator: threads must be positive");
  for (const auto& b : labels) {
    if (!(b.w > 0.0) || !(b.h > 0.0)) throw std::invalid_argument("box generator: label with zero extent");
  }
}

std::size_t iou_bin(double iou, std::size_t bins) {
  const double clamped = std::clamp(iou, 0.0, 1.0);
  return std::min(bins - 1, static_cast<std::size_t>(clamped * static_cast<double>(bins)));
}

std::vector<std::size_t> BoxPool::histogram(std::size_t bins) const {
  std::vector<std::size_t> h(bins, 0);
  for (const auto& r : records) ++h[iou_bin(r.iou, bins)];
  return h;
}

void BoxPool::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("box pool: cannot open " + path.string() + " for writing");
  out.write(kMagic, 4);
  write_le<std::uint32_t>(out, kPoolVersion);
  write_le<std::uint64_t>(out, records.size());
  for (const auto& r : records) {
    for (double v : r.z.params()) write_le(out, v);
    for (double v : r.y.params()) write_le(out, v);
    write_le(out, r.iou);
  }
  if (!out) throw std::runtime_error("box pool: write failed for " + path.string());
}

BoxPool BoxPool::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("box pool: cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("box pool: bad magic in " + path.string());
  }
  const auto version = read_le<std::uint32_t>(in);
  if (version != kPoolVersion) {
    throw std::runtime_error("box pool: unsupported version " + std::to_string(version));
  }
  const auto count = read_le<std::uint64_t>(in);
  BoxPool pool;
  pool.records.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::array<double, 6> z{}, y{};
    for (double& v : z) v = read_le<double>(in);
    for (double& v : y) v = read_le<double>(in);
    pool.records.push_back({RotatedBox::from_params(z), RotatedBox::from_params(y), read_le<double>(in)});
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw std::runtime_error("box pool: trailing bytes in " + path.string());
  }
  return pool;
}

UnderfilledBinsError::UnderfilledBinsError(std::vector<std::size_t> counts,
                                           std::vector<std::size_t> quota)
    : std::runtime_error("box pool: retry budget exhausted with underfilled IoU bins; counts [" +
                         join_counts(counts) + "] quota [" + join_counts(quota) + "]"),
      counts_(std::move(counts)),
      quota_(std::move(quota)) {}

BoxPool build_box_pool(const BoxGenConfig& config) {
  config.validate();
  std::vector<std::size_t> quota(config.bins, config.pool_size / config.bins);
  for (std::size_t i = 0; i < config.pool_size % config.bins; ++i) ++quota[i];
  std::vector<std::size_t> counts(config.bins, 0);
  std::size_t missing = config.pool_size;
  const std::uint64_t budget = config.max_attempts ? config.max_attempts : 200 * config.pool_size;

  BoxPool pool;
  pool.records.reserve(config.pool_size);
  std::uint64_t attempted = 0, chunk = 0;
  while (missing > 0 && attempted < budget) {
    const std::size_t wave = config.threads;
    std::vector<std::vector<BoxPairRecord>> drawn(wave);
    std::vector<std::uint64_t> sizes(wave, 0);
    std::uint64_t planned = attempted;
    for (std::size_t t = 0; t < wave; ++t) {
      sizes[t] = std::min<std::uint64_t>(kChunk, budget - std::min(budget, planned));
      planned += sizes[t];
    }
    if (wave == 1) {
      drawn[0] = draw_chunk(config, chunk, sizes[0]);
    } else {
      std::vector<std::thread> workers;
      for (std::size_t t = 0; t < wave; ++t) {
        if (sizes[t] == 0) continue;
        workers.emplace_back([&, t] { drawn[t] = draw_chunk(config, chunk + t, sizes[t]); });
      }
      for (auto& w : workers) w.join();
    }
    for (std::size_t t = 0; t < wave && missing > 0; ++t) {
      for (const auto& record : drawn[t]) {
        ++attempted;
        const std::size_t bin = iou_bin(record.iou, config.bins);
        if (counts[bin] < quota[bin]) {
          ++counts[bin];
          --missing;
          pool.records.push_back(record);
          if (missing == 0) break;
        }
      }
    }
    chunk += wave;
  }
  if (missing > 0) throw UnderfilledBinsError(counts, quota);
  return pool;
}

BoxPoolSampler::BoxPoolSampler(std::shared_ptr<const BoxPool> pool, std::uint64_t seed)
    : pool_(std::move(pool)), rng_(seed) {
  if (!pool_ || pool_->records.empty()) throw std::invalid_argument("box pool sampler: empty pool");
}

PairBatch BoxPoolSampler::next(std::size_t batch_size) {
  ++calls_;
  std::uniform_int_distribution<std::size_t> pick(0, pool_->records.size() - 1);
  std::vector<RotatedBox> zs, ys;
  PairBatch batch;
  for (std::size_t i = 0; i < batch_size; ++i) {
    const auto& r = pool_->records[pick(rng_)];
    zs.push_back(r.z);
    ys.push_back(r.y);
    batch.e.push_back(1.0 - r.iou);
  }
  batch.z = boxes_to_tensor(zs);
  batch.y = boxes_to_tensor(ys);
  return batch;
}

ad::Tensor boxes_to_tensor(const std::vector<RotatedBox>& boxes) {
  ad::Tensor t(ad::Shape{boxes.size(), 6});
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto p = boxes[i].params();
    std::copy(p.begin(), p.end(), t.data().begin() + 6 * i);
  }
  return t;
}

std::vector<RotatedBox> tensor_to_boxes(const ad::Tensor& t) {
  if (t.rank() != 2 || t.dim(1) != 6) {
    throw ad::ShapeError("tensor_to_boxes: expected [B, 6], got " + ad::shape_str(t.shape()));
  }
  std::vector<RotatedBox> out;
  for (std::size_t i = 0; i < t.dim(0); ++i) {
    std::array<double, 6> p{};
    for (std::size_t k = 0; k < 6; ++k) p[k] = t[6 * i + k];
    out.push_back(RotatedBox::from_params(p));
  }
  return out;
}

}  // namespace ls::surrogate
