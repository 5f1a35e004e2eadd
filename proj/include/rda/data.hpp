#ifndef RDA_DATA_HPP
#define RDA_DATA_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "rda/image.hpp"
#include "rda/random.hpp"
#include "rda/spectral.hpp"

namespace rda::data {

/// Shape templates are band-limited to normalized radius <= 1/3.
inline constexpr double kSemanticRadius = 1.0 / 3.0;
inline constexpr int kMaxClasses = 6;

/// Appearance of one domain: band-limited texture plus a brightness offset.
struct DomainSpec {
  RadialBand texture_band{0.6, 0.8};
  double amplitude = 0.1;  // texture standard deviation
  std::uint64_t texture_seed = 0;
  double brightness = 0.0;
};

struct LabeledSet {
  std::vector<Image> images;
  std::vector<int> labels;
  std::size_t size() const { return images.size(); }
};

struct UnlabeledSet {
  std::vector<Image> images;
  std::size_t size() const { return images.size(); }
};

struct GenerateConfig {
  std::uint64_t seed = 0;
  int per_class = 100;        // test splits
  int train_per_class = 25;   // training splits
  int classes = 4;
  int size = 28;
  DomainSpec source;
  DomainSpec target;

  static GenerateConfig defaults();
};

void validate(const GenerateConfig& config);

struct Datasets {
  LabeledSet source_train;
  LabeledSet source_test;
  UnlabeledSet target_train;
  LabeledSet target_test;
};

/// Training splits hold train_per_class images of every class, test splits per_class.
Datasets generate(const GenerateConfig& config);

/// Band-limited shape of class `label`, centered at (size/2 + dy, size/2 + dx),
/// with values in [0, 1] before band-limiting.
Image shape_template(int label, int size, double dy, double dx);
/// Zero-mean texture with the given standard deviation, whose spectrum is
/// supported inside `band`.
Image band_texture(int size, const RadialBand& band, double amplitude, Rng& rng);

// On disk each split is a directory holding FIMG files and an index.txt with
// lines "<path> <label|->", paths relative to the directory.
void save_set(const std::filesystem::path& dir, const std::vector<Image>& images,
              const std::vector<std::optional<int>>& labels);
struct LoadedSet {
  std::vector<Image> images;
  std::vector<std::optional<int>> labels;
};
LoadedSet load_set(const std::filesystem::path& dir);

void save_datasets(const std::filesystem::path& dir, const Datasets& datasets);
Datasets load_datasets(const std::filesystem::path& dir);

}  // namespace rda::data

#endif  // RDA_DATA_HPP
