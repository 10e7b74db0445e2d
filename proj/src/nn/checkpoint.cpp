#include "ssorl/nn/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include "ssorl/common/binary_io.hpp"

namespace ssorl::nn {

void write_checkpoint(std::ostream& out, const ParamSet& params) {
  io::write_magic(out, kCheckpointMagic);
  io::write_le<std::uint32_t>(out, kCheckpointVersion);
  for (const auto& e : params.entries()) {
    io::write_string(out, e.name);
    io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(e.value.rank()));
    for (std::size_t extent : e.value.shape()) io::write_le<std::uint64_t>(out, extent);
    for (double v : e.value.values()) io::write_le<double>(out, v);
  }
  if (!out) throw std::runtime_error("write_checkpoint: stream failure");
}

ParamSet read_checkpoint(std::istream& in) {
  io::expect_magic(in, kCheckpointMagic);
  const auto version = io::read_le<std::uint32_t>(in, "checkpoint version");
  if (version != kCheckpointVersion) throw std::runtime_error("read_checkpoint: unsupported version " + std::to_string(version));
  ParamSet params;
  while (in.peek() != std::char_traits<char>::eof()) {
    std::string name = io::read_string(in, "parameter name");
    const auto rank = io::read_le<std::uint32_t>(in, "parameter rank");
    if (rank > 8) throw std::runtime_error("read_checkpoint: implausible rank for " + name);
    Shape shape(rank);
    for (auto& extent : shape) extent = static_cast<std::size_t>(io::read_le<std::uint64_t>(in, "parameter extent"));
    Tensor value(shape);
    for (double& v : value.storage()) v = io::read_le<double>(in, "parameter values");
    params.add(name, std::move(value));
  }
  return params;
}

void save_checkpoint(const std::filesystem::path& path, const ParamSet& params) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  write_checkpoint(out, params);
}

ParamSet load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace ssorl::nn
