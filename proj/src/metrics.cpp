#include "rda/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "rda/error.hpp"
#include "rda/image_io.hpp"

namespace rda {

void RunMetrics::append(const MetricsRow& row) {
  if (!rows_.empty() && row.iter <= rows_.back().iter) {
    throw StateError("metrics rows must have increasing iterations");
  }
  rows_.push_back(row);
}

std::string RunMetrics::to_csv() const {
  std::string out = std::string(kMetricsHeader) + "\n";
  char line[512];
  for (const auto& r : rows_) {
    std::snprintf(line, sizeof line, "%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  r.iter, r.train_loss, r.src_test_loss, r.tgt_test_loss, r.tgt_acc,
                  r.gate_count, r.l_gat, r.l_rec, r.lr);
    out += line;
  }
  return out;
}

RunMetrics RunMetrics::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) {
    throw IoError("metrics file lacks the expected header");
  }
  RunMetrics metrics;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    MetricsRow r;
    int used = std::sscanf(line.c_str(), "%ld,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf", &r.iter,
                           &r.train_loss, &r.src_test_loss, &r.tgt_test_loss, &r.tgt_acc,
                           &r.gate_count, &r.l_gat, &r.l_rec, &r.lr);
    if (used != 9) throw IoError("malformed metrics row: " + line);
    metrics.append(r);
  }
  return metrics;
}

void RunMetrics::save(const std::filesystem::path& path) const { io::write_atomic(path, to_csv()); }

RunMetrics RunMetrics::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_csv(buffer.str());
}

std::vector<MetricsRow> RunMetrics::tail(double start_fraction) const {
  std::vector<MetricsRow> out;
  if (rows_.empty()) return out;
  const double start = start_fraction * static_cast<double>(rows_.back().iter);
  for (const auto& r : rows_) {
    if (static_cast<double>(r.iter) >= start) out.push_back(r);
  }
  return out;
}

}  // namespace rda
