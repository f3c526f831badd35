#include "ls/embed/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <string>

namespace ls::embed {

namespace {

constexpr int kFormatVersion = 1;

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t out = 0;
    for (int i = 0; i < 8; ++i) out |= ((v >> (8 * i)) & 0xFF) << (8 * (7 - i));
    return out;
  }
}

void write_f64(std::ostream& out, double v) {
  const std::uint64_t bits = to_little(std::bit_cast<std::uint64_t>(v));
  char bytes[8];
  std::memcpy(bytes, &bits, 8);
  out.write(bytes, 8);
}

double read_f64(std::istream& in) {
  char bytes[8];
  if (!in.read(bytes, 8)) throw CheckpointError("checkpoint: truncated parameter data");
  std::uint64_t bits = 0;
  std::memcpy(&bits, bytes, 8);
  return std::bit_cast<double>(to_little(bits));
}

nlohmann::json read_header_json(std::istream& in, const std::filesystem::path& path) {
  std::string line;
  if (!std::getline(in, line)) throw CheckpointError("checkpoint: empty file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError("checkpoint: bad header in " + path.string() + ": " + e.what());
  }
  if (j.value("format", "") != "lsurrogate-checkpoint" || j.value("version", 0) != kFormatVersion) {
    throw CheckpointError("checkpoint: unsupported format or version in " + path.string());
  }
  return j;
}

CheckpointHeader to_header(const nlohmann::json& j) {
  return {j.at("architecture"), j.at("seed").get<std::uint64_t>(), j.at("step").get<std::uint64_t>()};
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ad::ParamSet& params,
                     const CheckpointHeader& header) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& p : params.entries()) list.push_back({{"name", p.name}, {"shape", p.var.shape()}});
  const nlohmann::json j = {{"format", "lsurrogate-checkpoint"},
                            {"version", kFormatVersion},
                            {"architecture", header.architecture},
                            {"seed", header.seed},
                            {"step", header.step},
                            {"params", list}};
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("checkpoint: cannot open " + path.string() + " for writing");
  out << j.dump() << '\n';
  for (const auto& p : params.entries()) {
    for (double v : p.var.value().data()) write_f64(out, v);
  }
  if (!out) throw CheckpointError("checkpoint: write failed for " + path.string());
}

CheckpointHeader read_checkpoint_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("checkpoint: cannot open " + path.string());
  return to_header(read_header_json(in, path));
}

CheckpointHeader load_checkpoint(const std::filesystem::path& path, ad::ParamSet& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("checkpoint: cannot open " + path.string());
  const nlohmann::json j = read_header_json(in, path);
  const auto& list = j.at("params");
  auto& entries = params.entries();
  if (list.size() != entries.size()) {
    throw CheckpointError("checkpoint: " + path.string() + " holds " + std::to_string(list.size()) +
                          " parameters, expected " + std::to_string(entries.size()));
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto name = list[i].at("name").get<std::string>();
    const auto shape = list[i].at("shape").get<ad::Shape>();
    if (name != entries[i].name || shape != entries[i].var.shape()) {
      throw CheckpointError("checkpoint: parameter " + std::to_string(i) + " is '" + name + "' " +
                            ad::shape_str(shape) + ", expected '" + entries[i].name + "' " +
                            ad::shape_str(entries[i].var.shape()));
    }
  }
  for (auto& p : entries) {
    for (double& v : p.var.mutable_leaf_value().data()) v = read_f64(in);
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw CheckpointError("checkpoint: trailing bytes in " + path.string());
  }
  return to_header(j);
}

}  // namespace ls::embed
