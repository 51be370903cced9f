#include "vexrec/checkpoint.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <string>
#include <system_error>

#include "vexrec/binary_io.hpp"

namespace vexrec {

namespace {

constexpr char kMagic[4] = {'V', 'X', 'C', 'P'};
constexpr std::uint32_t kMaxDim = 1u << 28;

std::size_t tensor_count(const ModelParams& p) {
  std::size_t n = 0;
  p.for_each_tensor([&](std::string_view, ParamGroup, std::span<const double>) { ++n; });
  return n;
}

std::uint32_t read_u32(std::istream& in, const char* what) {
  std::uint32_t v = 0;
  if (!binary::read_le(in, v)) throw FormatError(std::string("VXCP: truncated ") + what);
  return v;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  const ModelDims& d = ckpt.params.dims;
  out.write(kMagic, 4);
  binary::write_le(out, kCheckpointVersion);
  for (std::size_t v : {d.users, d.items, d.embed, d.feature_dim, d.regions, d.hidden, d.vocab,
                        d.word_dim}) {
    binary::write_le(out, static_cast<std::uint32_t>(v));
  }
  binary::write_le(out, static_cast<std::uint32_t>(ckpt.variant));
  binary::write_le(out, static_cast<std::uint32_t>(tensor_count(ckpt.params)));
  ckpt.params.for_each_tensor([&](std::string_view name, ParamGroup, std::span<const double> v) {
    binary::write_le(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    binary::write_le(out, static_cast<std::uint64_t>(v.size()));
    for (double x : v) binary::write_le(out, x);
  });
  if (!out) throw std::runtime_error("VXCP: write failed");
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    write_checkpoint(out, ckpt);
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot move checkpoint into " + path.string() + ": " + ec.message());
  }
}

Checkpoint read_checkpoint(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  if (in.gcount() != 4 || !std::equal(magic.begin(), magic.end(), kMagic)) {
    throw FormatError("VXCP: bad magic");
  }
  const std::uint32_t version = read_u32(in, "header");
  if (version != kCheckpointVersion) {
    throw FormatError("VXCP: unsupported version " + std::to_string(version));
  }
  std::array<std::uint32_t, 8> raw{};
  for (auto& v : raw) {
    v = read_u32(in, "header");
    if (v > kMaxDim) throw FormatError("VXCP: implausible dimension " + std::to_string(v));
  }
  ModelDims d{raw[0], raw[1], raw[2], raw[3], raw[4], raw[5], raw[6], raw[7]};
  if (d.embed == 0) throw FormatError("VXCP: K must be positive");

  const std::uint32_t variant_code = read_u32(in, "header");
  if (variant_code > static_cast<std::uint32_t>(Variant::ReVecf)) {
    throw FormatError("VXCP: unknown variant code " + std::to_string(variant_code));
  }

  Checkpoint ckpt;
  ckpt.variant = static_cast<Variant>(variant_code);
  ckpt.params = ModelParams::zeros(d);
  const std::uint32_t count = read_u32(in, "header");
  if (count != tensor_count(ckpt.params)) {
    throw FormatError("VXCP: expected " + std::to_string(tensor_count(ckpt.params)) +
                      " tensors, header says " + std::to_string(count));
  }

  ckpt.params.for_each_tensor([&](std::string_view name, ParamGroup, std::span<double> v) {
    const std::uint32_t len = read_u32(in, "tensor name");
    if (len != name.size()) throw FormatError("VXCP: expected tensor " + std::string(name));
    std::string got(len, '\0');
    in.read(got.data(), len);
    if (in.gcount() != static_cast<std::streamsize>(len) || got != name) {
      throw FormatError("VXCP: expected tensor " + std::string(name));
    }
    std::uint64_t n = 0;
    if (!binary::read_le(in, n)) throw FormatError("VXCP: truncated tensor " + got);
    if (n != v.size()) {
      throw FormatError("VXCP: tensor " + got + " has " + std::to_string(n) + " values, expected " +
                        std::to_string(v.size()));
    }
    for (double& x : v) {
      if (!binary::read_le(in, x)) throw FormatError("VXCP: truncated tensor " + got);
      if (!std::isfinite(x)) throw FormatError("VXCP: non-finite value in " + got);
    }
  });
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("VXCP: trailing bytes");
  return ckpt;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace vexrec
