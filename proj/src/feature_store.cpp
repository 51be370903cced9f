#include "vexrec/feature_store.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "vexrec/binary_io.hpp"

namespace vexrec {

namespace {

constexpr char kMagic[4] = {'V', 'X', 'R', 'F'};

}  // namespace

RegionalFeatureStore::RegionalFeatureStore(std::size_t num_items, std::size_t regions,
                                           std::size_t dim)
    : num_items_(num_items), regions_(regions), dim_(dim), values_(num_items * regions * dim) {}

RegionalFeatureStore::RegionalFeatureStore(std::size_t num_items, std::size_t regions,
                                           std::size_t dim, std::vector<double> values)
    : num_items_(num_items), regions_(regions), dim_(dim), values_(std::move(values)) {
  if (values_.size() != num_items_ * regions_ * dim_) {
    throw FormatError("feature store payload does not match (M,h,D)");
  }
}

std::optional<std::size_t> exact_sqrt(std::size_t n) {
  auto r = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  for (std::size_t c = (r > 0 ? r - 1 : 0); c <= r + 1; ++c) {
    if (c * c == n) return c;
  }
  return std::nullopt;
}

std::optional<std::size_t> RegionalFeatureStore::grid_side() const { return exact_sqrt(regions_); }

FeatureGrid RegionalFeatureStore::grid(std::size_t item) const {
  if (item >= num_items_) {
    throw std::out_of_range("feature store has no item " + std::to_string(item));
  }
  const std::size_t stride = regions_ * dim_;
  return {std::span<const double>(values_).subspan(item * stride, stride), regions_, dim_};
}

std::span<double> RegionalFeatureStore::mutable_grid(std::size_t item) {
  const std::size_t stride = regions_ * dim_;
  return std::span<double>(values_).subspan(item * stride, stride);
}

RegionalFeatureStore read_feature_store(std::istream& in) {
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4) throw FormatError("VXRF: truncated magic");
  if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("VXRF: bad magic");

  std::uint32_t version = 0, m = 0, h = 0, d = 0;
  if (!binary::read_le(in, version) || !binary::read_le(in, m) || !binary::read_le(in, h) ||
      !binary::read_le(in, d)) {
    throw FormatError("VXRF: truncated header");
  }
  if (version != kFeatureFormatVersion) {
    throw FormatError("VXRF: unsupported version " + std::to_string(version));
  }
  if (m == 0 || h == 0 || d == 0) {
    throw FormatError("VXRF: zero dimension in header (M=" + std::to_string(m) +
                      ", h=" + std::to_string(h) + ", D=" + std::to_string(d) + ")");
  }
  const std::uint64_t mh = std::uint64_t{m} * h;
  if (mh > std::numeric_limits<std::uint64_t>::max() / sizeof(float) / d) {
    throw FormatError("VXRF: header dimensions overflow");
  }
  const std::uint64_t count = mh * d;

  // Declared payload size must agree with what is actually present.
  const auto payload_start = in.tellg();
  in.seekg(0, std::ios::end);
  const auto end = in.tellg();
  in.seekg(payload_start);
  if (payload_start < 0 || end < 0) throw FormatError("VXRF: stream is not seekable");
  const auto available = static_cast<std::uint64_t>(end - payload_start);
  if (available != count * sizeof(float)) {
    throw FormatError("VXRF: payload holds " + std::to_string(available) + " bytes, header (M=" +
                      std::to_string(m) + ", h=" + std::to_string(h) + ", D=" +
                      std::to_string(d) + ") declares " + std::to_string(count * sizeof(float)));
  }

  std::vector<double> values(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    float f = 0.0F;
    if (!binary::read_le(in, f)) throw FormatError("VXRF: truncated payload");
    if (!std::isfinite(f)) {
      throw FormatError("VXRF: non-finite feature value at index " + std::to_string(k));
    }
    values[k] = static_cast<double>(f);
  }
  return RegionalFeatureStore(m, h, d, std::move(values));
}

RegionalFeatureStore read_feature_store(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open feature store " + path.string());
  return read_feature_store(in);
}

void write_feature_store(std::ostream& out, const RegionalFeatureStore& store) {
  out.write(kMagic, 4);
  binary::write_le(out, kFeatureFormatVersion);
  binary::write_le(out, static_cast<std::uint32_t>(store.num_items()));
  binary::write_le(out, static_cast<std::uint32_t>(store.regions()));
  binary::write_le(out, static_cast<std::uint32_t>(store.dim()));
  for (double v : store.values()) binary::write_le(out, static_cast<float>(v));
}

void write_feature_store(const std::filesystem::path& path, const RegionalFeatureStore& store) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write feature store " + path.string());
  write_feature_store(out, store);
}

}  // namespace vexrec
