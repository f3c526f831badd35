#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <stdexcept>
#include <vector>

#include "ls/metrics/geometry.hpp"
#include "ls/surrogate/pair_batch.hpp"

namespace ls::surrogate {

/// Random label boxes: centers uniform in [center_lo, center_hi], long side
/// uniform in [min_size, max_size], aspect ratio log-uniform in [1, max_aspect],
/// angle uniform over a half turn.
struct BoxLabelConfig {
  std::size_t count = 1000;
  double center_lo = 0.2, center_hi = 0.8;
  double min_size = 0.05, max_size = 0.3;
  double max_aspect = 8.0;
  std::uint64_t seed = 0;

  void validate() const;
};

metrics::RotatedBox random_label_box(const BoxLabelConfig& config, std::mt19937_64& rng);
std::vector<metrics::RotatedBox> random_label_boxes(const BoxLabelConfig& config);

/// Perturbation limits. Each draw scales all three by one magnitude
/// k ~ U(0, 1), so small and large distortions are both common.
struct PerturbBounds {
  double center_shift = 1.0;     // in units of min(w, h)
  double log_scale = 0.6931471805599453;  // ln 2, per extent
  double angle = 0.7853981633974483;      // 45 degrees, radians
};

metrics::RotatedBox perturb_box(const metrics::RotatedBox& box, const PerturbBounds& bounds,
                                std::mt19937_64& rng);

struct BoxGenConfig {
  std::vector<metrics::RotatedBox> labels;
  PerturbBounds bounds;
  std::size_t pool_size = 3'000'000;
  std::size_t bins = 10;
  std::uint64_t seed = 0;
  /// Candidate pairs tried before giving up; 0 means 200 * pool_size.
  std::uint64_t max_attempts = 0;
  std::size_t threads = 1;

  void validate() const;
};

struct BoxPairRecord {
  metrics::RotatedBox z;  // perturbed
  metrics::RotatedBox y;  // source label
  double iou = 0.0;
};

/// Bin index of an IoU value; 1.0 falls in the top bin.
std::size_t iou_bin(double iou, std::size_t bins);

struct BoxPool {
  std::vector<BoxPairRecord> records;

  std::vector<std::size_t> histogram(std::size_t bins) const;

  /// Binary layout: "LSPL", u32 version, u64 count, then per record
  /// 6 f64 for z, 6 f64 for y and one f64 IoU, all little-endian.
  void save(const std::filesystem::path& path) const;
  static BoxPool load(const std::filesystem::path& path);
};

class UnderfilledBinsError : public std::runtime_error {
 public:
  UnderfilledBinsError(std::vector<std::size_t> counts, std::vector<std::size_t> quota);
  const std::vector<std::size_t>& counts() const { return counts_; }
  const std::vector<std::size_t>& quota() const { return quota_; }

 private:
  std::vector<std::size_t> counts_, quota_;
};

/// Fills every IoU bin to pool_size / bins entries (remainder to the lowest
/// bins) by rejection. Candidates are drawn in fixed-size chunks with
/// per-chunk seeds and merged in chunk order, so the pool does not depend
/// on the thread count.
BoxPool build_box_pool(const BoxGenConfig& config);

/// Draws uniformly from a pool. The surrogate target is 1 - IoU so that a
/// perfect match sits at distance zero.
class BoxPoolSampler {
 public:
  BoxPoolSampler(std::shared_ptr<const BoxPool> pool, std::uint64_t seed);

  PairBatch next(std::size_t batch_size);
  std::size_t calls() const { return calls_; }

 private:
  std::shared_ptr<const BoxPool> pool_;
  std::mt19937_64 rng_;
  std::size_t calls_ = 0;
};

/// Stacks box parameters into [B, 6].
ad::Tensor boxes_to_tensor(const std::vector<metrics::RotatedBox>& boxes);
std::vector<metrics::RotatedBox> tensor_to_boxes(const ad::Tensor& t);

}  // namespace ls::surrogate
