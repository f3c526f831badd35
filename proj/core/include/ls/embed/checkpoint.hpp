#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>

#include <json.hpp>

#include "ls/ad/params.hpp"

namespace ls::embed {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File layout: one line of JSON (architecture, seed, step, parameter names
/// and shapes), then every parameter's values as little-endian f64 in the
/// order the header lists them.
struct CheckpointHeader {
  nlohmann::json architecture;
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
};

void save_checkpoint(const std::filesystem::path& path, const ad::ParamSet& params,
                     const CheckpointHeader& header);

/// Reads the header only.
CheckpointHeader read_checkpoint_header(const std::filesystem::path& path);

/// Overwrites `params` with stored values. Names, order and shapes must match.
CheckpointHeader load_checkpoint(const std::filesystem::path& path, ad::ParamSet& params);

}  // namespace ls::embed
