#ifndef RDA_METRICS_HPP
#define RDA_METRICS_HPP

#include <filesystem>
#include <string>
#include <vector>

namespace rda {

struct MetricsRow {
  long iter = 0;
  double train_loss = 0.0;  // mean defend-phase task loss since the previous row
  double src_test_loss = 0.0;
  double tgt_test_loss = 0.0;
  double tgt_acc = 0.0;
  double gate_count = 0.0;  // mean selected bands per attacked image
  double l_gat = 0.0;
  double l_rec = 0.0;
  double lr = 0.0;

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

inline constexpr const char* kMetricsHeader =
    "iter,train_loss,src_test_loss,tgt_test_loss,tgt_acc,gate_count,l_gat,l_rec,lr";

/// Append-only per-iteration record.
class RunMetrics {
 public:
  void append(const MetricsRow& row);
  const std::vector<MetricsRow>& rows() const { return rows_; }
  bool empty() const { return rows_.empty(); }

  std::string to_csv() const;
  static RunMetrics from_csv(const std::string& text);

  void save(const std::filesystem::path& path) const;
  static RunMetrics load(const std::filesystem::path& path);

  /// Rows with iter >= start_fraction * last iter.
  std::vector<MetricsRow> tail(double start_fraction) const;

 private:
  std::vector<MetricsRow> rows_;
};

}  // namespace rda

#endif  // RDA_METRICS_HPP
