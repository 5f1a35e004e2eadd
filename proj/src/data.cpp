#include "rda/data.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "rda/error.hpp"
#include "rda/image_io.hpp"

namespace rda::data {

namespace {

constexpr double kBackground = 0.25;
constexpr double kContrast = 0.5;
constexpr double kMaxShift = 2.0;

bool inside(int label, double y, double x, double size) {
  const double r = std::hypot(y, x) / size;
  const double ay = std::abs(y) / size;
  const double ax = std::abs(x) / size;
  switch (label) {
    case 0: return r <= 0.26;                                       // disk
    case 1: return ay <= 0.10 && ax <= 0.34;                        // horizontal bar
    case 2: return (ay <= 0.07 && ax <= 0.32) || (ax <= 0.07 && ay <= 0.32);  // cross
    case 3: return r >= 0.18 && r <= 0.32;                          // ring
    case 4: return ax <= 0.10 && ay <= 0.34;                        // vertical bar
    case 5: return std::max(ay, ax) <= 0.30 && std::max(ay, ax) >= 0.20;  // square frame
    default: return false;
  }
}

Image band_limit(const Image& image, double radius) {
  auto spectra = dft2(image);
  for (auto& s : spectra) apply_band(s, RadialBand{0.0, radius});
  return idft2(spectra);
}

void check_domain(const DomainSpec& domain, const char* name) {
  validate(domain.texture_band);
  if (domain.texture_band.lo < kSemanticRadius) {
    throw ConfigError(std::string(name) +
                      " texture band overlaps the semantic band (lo must be >= 1/3)");
  }
  if (!(domain.amplitude >= 0.0) || !std::isfinite(domain.amplitude)) {
    throw ConfigError(std::string(name) + " texture amplitude must be non-negative");
  }
  if (!std::isfinite(domain.brightness)) throw ConfigError("brightness must be finite");
}

enum Split : std::uint64_t { source_train = 1, source_test = 2, target_train = 3, target_test = 4 };

Image render(int label, const GenerateConfig& config, const DomainSpec& domain, Split split,
             std::size_t index) {
  Rng rng(derive_seed(derive_seed(config.seed ^ domain.texture_seed, split), index));
  const double dy = (2.0 * rng.uniform() - 1.0) * kMaxShift;
  const double dx = (2.0 * rng.uniform() - 1.0) * kMaxShift;
  Image shape = shape_template(label, config.size, dy, dx);
  Image texture = band_texture(config.size, domain.texture_band, domain.amplitude, rng);
  Image out(config.size, config.size, 1);
  auto o = out.values();
  auto s = shape.values();
  auto t = texture.values();
  for (std::size_t k = 0; k < o.size(); ++k) {
    double v = kBackground + kContrast * s[k] + t[k] + domain.brightness;
    // stored at float precision so FIMG round trips are exact
    o[k] = static_cast<double>(static_cast<float>(std::clamp(v, 0.0, 1.0)));
  }
  return out;
}

LabeledSet make_labeled(const GenerateConfig& config, const DomainSpec& domain, Split split,
                        int per_class) {
  LabeledSet set;
  std::size_t index = 0;
  for (int n = 0; n < per_class; ++n) {
    for (int label = 0; label < config.classes; ++label) {
      set.images.push_back(render(label, config, domain, split, index++));
      set.labels.push_back(label);
    }
  }
  return set;
}

}  // namespace

GenerateConfig GenerateConfig::defaults() {
  GenerateConfig config;
  config.source = DomainSpec{{0.6, 0.8}, 0.35, 11, 0.0};
  config.target = DomainSpec{{0.7, 0.9}, 0.35, 23, 0.3};
  return config;
}

void validate(const GenerateConfig& config) {
  if (config.classes < 2 || config.classes > kMaxClasses) {
    throw ConfigError("classes must lie in [2, " + std::to_string(kMaxClasses) + "]");
  }
  if (config.per_class < 1 || config.train_per_class < 1) {
    throw ConfigError("per-class counts must be positive");
  }
  if (config.size < 8) throw ConfigError("image size must be at least 8");
  check_domain(config.source, "source");
  check_domain(config.target, "target");
}

Image shape_template(int label, int size, double dy, double dx) {
  if (label < 0 || label >= kMaxClasses) throw ParameterError("unknown shape class");
  Image image(size, size, 1);
  const double c = size / 2;
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) {
      image.at(0, i, j) = inside(label, i - c - dy, j - c - dx, size) ? 1.0 : 0.0;
    }
  }
  return band_limit(image, kSemanticRadius);
}

Image band_texture(int size, const RadialBand& band, double amplitude, Rng& rng) {
  Image noise(size, size, 1);
  for (double& v : noise.values()) v = rng.normal();
  auto spectra = dft2(noise);
  apply_band(spectra[0], band);
  Image texture = idft2(spectra);
  double mean = 0.0, sq = 0.0;
  for (double v : texture.values()) {
    mean += v;
    sq += v * v;
  }
  const double n = static_cast<double>(texture.size());
  mean /= n;
  const double std = std::sqrt(std::max(sq / n - mean * mean, 0.0));
  // The band excludes DC, so the texture is zero-mean up to rounding.
  const double scale = std > 0.0 ? amplitude / std : 0.0;
  for (double& v : texture.values()) v *= scale;
  return texture;
}

Datasets generate(const GenerateConfig& config) {
  validate(config);
  Datasets out;
  out.source_train = make_labeled(config, config.source, source_train, config.train_per_class);
  out.source_test = make_labeled(config, config.source, source_test, config.per_class);
  out.target_train.images =
      make_labeled(config, config.target, target_train, config.train_per_class).images;
  out.target_test = make_labeled(config, config.target, target_test, config.per_class);
  return out;
}

void save_set(const std::filesystem::path& dir, const std::vector<Image>& images,
              const std::vector<std::optional<int>>& labels) {
  if (images.size() != labels.size()) throw DimensionError("images and labels differ in length");
  std::filesystem::create_directories(dir);
  std::string index;
  for (std::size_t k = 0; k < images.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "%05zu.fimg", k);
    io::write_fimg(dir / name, images[k]);
    index += name;
    index += ' ';
    index += labels[k] ? std::to_string(*labels[k]) : "-";
    index += '\n';
  }
  io::write_atomic(dir / "index.txt", index);
}

LoadedSet load_set(const std::filesystem::path& dir) {
  std::ifstream in(dir / "index.txt");
  if (!in) throw IoError("missing index file in " + dir.string());
  LoadedSet set;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string path, label;
    if (!(fields >> path >> label)) throw IoError("malformed index line: " + line);
    set.images.push_back(io::read_fimg(dir / path));
    if (label == "-") {
      set.labels.emplace_back();
    } else {
      try {
        set.labels.emplace_back(std::stoi(label));
      } catch (const std::exception&) {
        throw IoError("malformed label in index line: " + line);
      }
    }
  }
  return set;
}

namespace {

std::vector<std::optional<int>> wrap(const std::vector<int>& labels) {
  return {labels.begin(), labels.end()};
}

LabeledSet require_labels(LoadedSet set, const std::filesystem::path& dir) {
  LabeledSet out;
  for (const auto& l : set.labels) {
    if (!l) throw IoError("unlabeled entry in labeled split " + dir.string());
    out.labels.push_back(*l);
  }
  out.images = std::move(set.images);
  return out;
}

}  // namespace

void save_datasets(const std::filesystem::path& dir, const Datasets& datasets) {
  save_set(dir / "source_train", datasets.source_train.images, wrap(datasets.source_train.labels));
  save_set(dir / "source_test", datasets.source_test.images, wrap(datasets.source_test.labels));
  save_set(dir / "target_train", datasets.target_train.images,
           std::vector<std::optional<int>>(datasets.target_train.size()));
  save_set(dir / "target_test", datasets.target_test.images, wrap(datasets.target_test.labels));
}

Datasets load_datasets(const std::filesystem::path& dir) {
  Datasets out;
  out.source_train = require_labels(load_set(dir / "source_train"), dir / "source_train");
  out.source_test = require_labels(load_set(dir / "source_test"), dir / "source_test");
  out.target_train.images = load_set(dir / "target_train").images;
  out.target_test = require_labels(load_set(dir / "target_test"), dir / "target_test");
  return out;
}

}  // namespace rda::data
