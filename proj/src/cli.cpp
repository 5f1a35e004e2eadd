#include "rda/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rda/attacker.hpp"
#include "rda/checkpoint.hpp"
#include "rda/data.hpp"
#include "rda/error.hpp"
#include "rda/image_io.hpp"
#include "rda/svg.hpp"
#include "rda/trainer.hpp"

namespace fs = std::filesystem;

namespace rda::cli {

RadialBand parse_band(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos) throw UsageError("band must be written lo:hi, got '" + text + "'");
  RadialBand band;
  try {
    std::size_t used = 0;
    band.lo = std::stod(text.substr(0, colon), &used);
    if (used != colon) throw std::invalid_argument(text);
    const std::string hi = text.substr(colon + 1);
    band.hi = std::stod(hi, &used);
    if (used != hi.size()) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    throw UsageError("band must be written lo:hi, got '" + text + "'");
  }
  try {
    validate(band);
  } catch (const ParameterError& e) {
    throw UsageError(e.what());
  }
  return band;
}

namespace {

std::string image_ext(const Image& image) { return image.channels() == 1 ? ".pgm" : ".ppm"; }

// ---------------------------------------------------------------- gen-data

struct GenDataOptions {
  std::uint64_t seed = 0;
  int classes = 4;
  int per_class = 100;
  int train_per_class = 25;
  int size = 28;
  std::string src_band = "0.6:0.8";
  std::string tgt_band = "0.7:0.9";
  std::optional<double> amplitude;
  std::string out;
};

void cmd_gen_data(const GenDataOptions& opt) {
  auto config = data::GenerateConfig::defaults();
  config.seed = opt.seed;
  config.classes = opt.classes;
  config.per_class = opt.per_class;
  config.train_per_class = opt.train_per_class;
  config.size = opt.size;
  config.source.texture_band = parse_band(opt.src_band);
  config.target.texture_band = parse_band(opt.tgt_band);
  if (opt.amplitude) config.source.amplitude = config.target.amplitude = *opt.amplitude;
  auto datasets = data::generate(config);
  data::save_datasets(opt.out, datasets);
  // a few previews per split for inspection
  fs::create_directories(fs::path(opt.out) / "preview");
  for (int k = 0; k < std::min<int>(config.classes, static_cast<int>(datasets.source_test.size())); ++k) {
    io::write_pnm(fs::path(opt.out) / "preview" / ("source_" + std::to_string(k) + ".pgm"),
                  datasets.source_test.images[static_cast<std::size_t>(k)]);
    io::write_pnm(fs::path(opt.out) / "preview" / ("target_" + std::to_string(k) + ".pgm"),
                  datasets.target_test.images[static_cast<std::size_t>(k)]);
  }
  const auto total = datasets.source_train.size() + datasets.source_test.size() +
                     datasets.target_train.size() + datasets.target_test.size();
  std::cout << "wrote " << total << " images to " << opt.out << "\n";
}

// --------------------------------------------------------------- decompose

struct DecomposeOptions {
  std::string in;
  int bands = 16;
  std::string out;
};

void cmd_decompose(const DecomposeOptions& opt) {
  if (opt.bands < 1) throw UsageError("--bands must be at least 1");
  Image original = io::read_image(opt.in);
  auto squared = resize_to_square(original);
  auto spectra = dft2(squared.image);
  std::vector<BandStack> stacks;
  for (const auto& s : spectra) stacks.push_back(decompose(s, opt.bands));

  fs::create_directories(opt.out);
  bool exact = true;
  for (std::size_t c = 0; c < spectra.size(); ++c) exact = exact && compose(stacks[c]) == spectra[c];

  Image sum(squared.image.height(), squared.image.width(), squared.image.channels());
  for (int n = 0; n < opt.bands; ++n) {
    std::vector<Spectrum> channels;
    for (const auto& stack : stacks) channels.push_back(stack.bands[static_cast<std::size_t>(n)]);
    Image band = idft2(channels);
    auto sv = sum.values();
    auto bv = band.values();
    for (std::size_t k = 0; k < sv.size(); ++k) sv[k] += bv[k];
    char name[32];
    std::snprintf(name, sizeof name, "band_%03d", n + 1);
    Image restored = restore_size(band, squared.original);
    io::write_pnm(fs::path(opt.out) / (std::string(name) + image_ext(restored)), restored);
    io::write_fimg(fs::path(opt.out) / (std::string(name) + ".fimg"), restored);
  }
  const double error = max_abs_difference(sum, squared.image);
  const auto layout = BandLayout::get(squared.image.height(), opt.bands);

  std::ostringstream report;
  report << "bands " << opt.bands << "\n";
  report << "spectral_recomposition_exact " << (exact ? "yes" : "no") << "\n";
  char line[64];
  std::snprintf(line, sizeof line, "max_recomposition_error %.3e\n", error);
  report << line;
  for (int n = 0; n < opt.bands; ++n) {
    report << "band " << n + 1 << " coefficients " << layout->occupancy()[static_cast<std::size_t>(n)]
           << "\n";
  }
  io::write_atomic(fs::path(opt.out) / "report.txt", report.str());
  std::cout << report.str();
  if (!exact || error > 1e-9) throw NumericError("recomposition check failed");
}

// ------------------------------------------------------------------ attack

struct AttackOptions {
  std::string in;
  std::string ref;
  int bands = 16;
  std::string gate_file;
  std::optional<double> gate_random;
  std::uint64_t seed = 0;
  std::string out;
};

std::vector<int> read_gate_file(const fs::path& path, int bands) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open gate file " + path.string());
  std::vector<int> gate(static_cast<std::size_t>(bands), -1);
  int index = 0, value = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    if (!(fields >> index >> value) || index < 1 || index > bands || (value != 0 && value != 1)) {
      throw IoError("malformed gate line '" + line + "' (expected '<band 1..N> <0|1>')");
    }
    gate[static_cast<std::size_t>(index - 1)] = value;
  }
  for (int g : gate) {
    if (g < 0) throw IoError("gate file must list every band 1.." + std::to_string(bands));
  }
  return gate;
}

void cmd_attack(const AttackOptions& opt) {
  if (opt.bands < 1) throw UsageError("--bands must be at least 1");
  if (opt.gate_file.empty() == !opt.gate_random.has_value()) {
    throw UsageError("give exactly one of --gate-file or --gate-random");
  }
  Image x = io::read_image(opt.in);
  Image ref = io::read_image(opt.ref);
  if (!x.same_shape(ref)) throw DimensionError("input and reference shapes differ");
  auto squared = resize_to_square(x);
  ReferencePool pool({ref});

  GateSample gate;
  if (!opt.gate_file.empty()) {
    gate = GateSample::fixed(read_gate_file(opt.gate_file, opt.bands));
  } else {
    double p = *opt.gate_random;
    if (!(p > 0.0 && p < 1.0)) throw UsageError("--gate-random expects a probability in (0, 1)");
    Rng rng(opt.seed);
    gate = gate_forward(GateParams::with_probability(opt.bands, p), rng);
  }
  auto sample = compose_attack(squared.image, dft2(squared.image), pool, 0, gate, opt.bands);
  Image faa = restore_size(sample.image, squared.original);
  Image faa_raw = restore_size(sample.raw, squared.original);

  fs::create_directories(opt.out);
  const fs::path out(opt.out);
  io::write_pnm(out / ("x" + image_ext(x)), x);
  io::write_pnm(out / ("x_ref" + image_ext(ref)), ref);
  io::write_pnm(out / ("x_faa" + image_ext(faa)), faa);
  io::write_fimg(out / "x_faa_raw.fimg", faa_raw);
  std::string lines;
  for (int n = 0; n < opt.bands; ++n) {
    lines += std::to_string(n + 1) + " " + std::to_string(gate.hard[static_cast<std::size_t>(n)]) + "\n";
  }
  io::write_atomic(out / "gate.txt", lines);
  std::cout << "perturbed " << gate.count() << " of " << opt.bands << " bands\n";
}

// ------------------------------------------------------------------- train

struct TrainOptions {
  std::string mode = "faa";
  std::string data;
  std::string model = "mlp";
  std::string unsup = "self";
  std::string out;
  RunConfig config;
};

void cmd_train(TrainOptions opt) {
  opt.config.loss.mode = parse_mode(opt.mode);
  opt.config.loss.unsup = parse_unsup(opt.unsup);
  opt.config.model_kind = parse_model_kind(opt.model);
  try {
    validate(opt.config);
  } catch (const ParameterError& e) {
    throw UsageError(e.what());
  }
  auto datasets = data::load_datasets(opt.data);
  auto result = train(opt.config, datasets);
  fs::create_directories(opt.out);
  const fs::path out(opt.out);
  result.metrics.save(out / "metrics.csv");
  checkpoint::save_model(out / "model.ckpt", result.model);
  if (result.attacker) checkpoint::save_gate(out / "gate.ckpt", result.attacker->gate);
  const auto& last = result.metrics.rows().back();
  char summary[128];
  std::snprintf(summary, sizeof summary, "iter %ld train_loss %.4f tgt_test_loss %.4f tgt_acc %.4f\n",
                last.iter, last.train_loss, last.tgt_test_loss, last.tgt_acc);
  std::cout << summary;
}

// ------------------------------------------------------------------ curves

struct CurvesOptions {
  std::vector<std::string> metrics;
  std::string out;
};

void cmd_curves(const CurvesOptions& opt) {
  std::vector<NamedMetrics> runs;
  for (const auto& path : opt.metrics) {
    RunMetrics metrics;
    try {
      metrics = RunMetrics::load(path);
    } catch (const IoError& e) {
      throw UsageError(e.what());
    }
    // runs are named after their output directory
    const fs::path file(path);
    std::string name = file.parent_path().filename().string();
    if (name.empty()) name = file.stem().string();
    runs.push_back({name, std::move(metrics)});
  }
  io::write_atomic(opt.out, loss_curves_svg(runs));
}

int dispatch(CLI::App& app, int argc, char** argv, const std::function<void()>& action) {
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  try {
    action();
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Fourier adversarial attacking for robust domain adaptation"};
  app.require_subcommand(1);

  GenDataOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate the synthetic two-domain dataset");
  gen_cmd->add_option("--seed", gen.seed, "Random seed");
  gen_cmd->add_option("--classes", gen.classes, "Number of shape classes (2-6)");
  gen_cmd->add_option("--per-class", gen.per_class, "Images per class in each test split");
  gen_cmd->add_option("--train-per-class", gen.train_per_class,
                      "Images per class in each training split");
  gen_cmd->add_option("--size", gen.size, "Image side length");
  gen_cmd->add_option("--src-band", gen.src_band, "Source texture band lo:hi");
  gen_cmd->add_option("--tgt-band", gen.tgt_band, "Target texture band lo:hi");
  gen_cmd->add_option("--amplitude", gen.amplitude, "Texture amplitude for both domains");
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();

  DecomposeOptions dec;
  auto* dec_cmd = app.add_subcommand("decompose", "Split an image into N frequency bands");
  dec_cmd->add_option("--in", dec.in, "Input image (PGM/PPM/FIMG)")->required();
  dec_cmd->add_option("--bands", dec.bands, "Number of bands N");
  dec_cmd->add_option("--out", dec.out, "Output directory")->required();

  AttackOptions att;
  auto* att_cmd = app.add_subcommand("attack", "Swap gated bands with a reference image");
  att_cmd->add_option("--in", att.in, "Input image")->required();
  att_cmd->add_option("--ref", att.ref, "Reference image")->required();
  att_cmd->add_option("--bands", att.bands, "Number of bands N");
  auto* gate_file = att_cmd->add_option("--gate-file", att.gate_file, "Gate file: '<band> <0|1>' lines");
  auto* gate_random =
      att_cmd->add_option("--gate-random", att.gate_random, "Perturb each band with probability p");
  gate_file->excludes(gate_random);
  att_cmd->add_option("--seed", att.seed, "Seed for --gate-random");
  att_cmd->add_option("--out", att.out, "Output directory")->required();

  TrainOptions tr;
  auto& rc = tr.config;
  auto* tr_cmd = app.add_subcommand("train", "Run defend/attack training");
  tr_cmd->add_option("--mode", tr.mode, "baseline|faa-s|faa-t|faa");
  tr_cmd->add_option("--data", tr.data, "Dataset directory from gen-data")->required();
  tr_cmd->add_option("--model", tr.model, "linear|mlp");
  tr_cmd->add_option("--hidden", rc.hidden, "Hidden width of the mlp");
  tr_cmd->add_option("--iters", rc.iters, "Training iterations");
  tr_cmd->add_option("--batch", rc.batch, "Batch size per domain");
  tr_cmd->add_option("--lr", rc.lr, "Task model base learning rate");
  tr_cmd->add_option("--momentum", rc.momentum, "Task model momentum");
  tr_cmd->add_option("--wd", rc.weight_decay, "Task model weight decay");
  tr_cmd->add_option("--poly-power", rc.poly_power, "Polynomial decay power");
  tr_cmd->add_option("--bands", rc.bands, "Number of frequency bands N");
  tr_cmd->add_option("--budget-p", rc.budget, "Gate budget p");
  tr_cmd->add_option("--tau", rc.tau, "Gumbel-Softmax temperature");
  tr_cmd->add_option("--rec-lo", rc.rec_band.lo, "Band-pass lower edge for L_rec");
  tr_cmd->add_option("--rec-hi", rc.rec_band.hi, "Band-pass upper edge for L_rec");
  tr_cmd->add_option("--attacker-lr", rc.attacker_lr, "Attacker learning rate");
  tr_cmd->add_option("--attacker-momentum", rc.attacker_momentum, "Attacker momentum");
  tr_cmd->add_option("--unsup", tr.unsup, "self|entropy");
  tr_cmd->add_option("--lambda", rc.loss.lambda, "Target loss weight");
  tr_cmd->add_option("--pseudo-thresh", rc.loss.pseudo_threshold, "Pseudo-label confidence");
  tr_cmd->add_option("--pseudo-warmup", rc.pseudo_warmup, "Iteration at which pseudo-labelling starts");
  tr_cmd->add_option("--log-interval", rc.log_interval, "Iterations per metrics row");
  tr_cmd->add_option("--seed", rc.seed, "Random seed");
  tr_cmd->add_option("--out", tr.out, "Output directory")->required();

  CurvesOptions cur;
  auto* cur_cmd = app.add_subcommand("curves", "Plot train and target-test loss curves");
  cur_cmd->add_option("--metrics", cur.metrics, "metrics.csv files")->required();
  cur_cmd->add_option("--out", cur.out, "Output SVG")->required();

  return dispatch(app, argc, argv, [&] {
    if (*gen_cmd) cmd_gen_data(gen);
    if (*dec_cmd) cmd_decompose(dec);
    if (*att_cmd) cmd_attack(att);
    if (*tr_cmd) cmd_train(tr);
    if (*cur_cmd) cmd_curves(cur);
  });
}

int run(const std::vector<std::string>& args) {
  std::vector<std::string> storage;
  storage.push_back("rda");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace rda::cli
