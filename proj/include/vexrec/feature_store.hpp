#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace vexrec {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Read-only view of one item's h × D region grid.
struct FeatureGrid {
  std::span<const double> data;
  std::size_t regions = 0;
  std::size_t dim = 0;

  std::span<const double> region(std::size_t k) const { return data.subspan(k * dim, dim); }
};

// Per-item regional image features. Stored on disk as 32-bit floats and
// promoted to 64-bit on load.
class RegionalFeatureStore {
 public:
  RegionalFeatureStore() = default;
  RegionalFeatureStore(std::size_t num_items, std::size_t regions, std::size_t dim);
  RegionalFeatureStore(std::size_t num_items, std::size_t regions, std::size_t dim,
                       std::vector<double> values);

  std::size_t num_items() const { return num_items_; }
  std::size_t regions() const { return regions_; }
  std::size_t dim() const { return dim_; }
  // √h when h is a perfect square.
  std::optional<std::size_t> grid_side() const;

  FeatureGrid grid(std::size_t item) const;
  std::span<double> mutable_grid(std::size_t item);
  const std::vector<double>& values() const { return values_; }

  bool operator==(const RegionalFeatureStore&) const = default;

 private:
  std::size_t num_items_ = 0;
  std::size_t regions_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> values_;
};

std::optional<std::size_t> exact_sqrt(std::size_t n);

// Binary layout: "VXRF", u32 version (1), u32 M, u32 h, u32 D, then M·h·D
// little-endian float32 values, item-major then region-major.
inline constexpr std::uint32_t kFeatureFormatVersion = 1;

RegionalFeatureStore read_feature_store(std::istream& in);
RegionalFeatureStore read_feature_store(const std::filesystem::path& path);
void write_feature_store(std::ostream& out, const RegionalFeatureStore& store);
void write_feature_store(const std::filesystem::path& path, const RegionalFeatureStore& store);

}  // namespace vexrec
