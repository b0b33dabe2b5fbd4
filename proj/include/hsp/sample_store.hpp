#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace hsp {

/// Row-per-draw table of named scalar columns, plus run diagnostics.
class SampleStore {
 public:
  SampleStore() = default;
  explicit SampleStore(std::vector<std::string> columns);

  void add_row(std::span<const double> row);
  std::size_t rows() const { return n_rows_; }
  std::size_t cols() const { return columns_.size(); }
  const std::vector<std::string>& columns() const { return columns_; }
  bool has_column(const std::string& name) const;
  std::size_t index_of(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;
  std::vector<double> column(std::size_t c) const;
  double at(std::size_t row, std::size_t col) const { return data_[row * columns_.size() + col]; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * columns_.size(), columns_.size()};
  }

  /// Comma separated with a header row; values printed with 17 significant digits.
  void write_csv(const std::string& path) const;
  static SampleStore read_csv(const std::string& path);

  /// Acceptance rates, swap rates, final ladder and similar run facts.
  std::map<std::string, double> diagnostics;

  friend bool operator==(const SampleStore& a, const SampleStore& b) {
    return a.columns_ == b.columns_ && a.data_ == b.data_ && a.diagnostics == b.diagnostics;
  }

 private:
  std::vector<std::string> columns_;
  std::map<std::string, std::size_t> lookup_;
  std::vector<double> data_;
  std::size_t n_rows_ = 0;
};

/// Effective sample size from the initial positive sequence of
/// autocorrelations (Geyer).
double effective_sample_size(std::span<const double> x);

/// Batch-means estimate of the Monte-Carlo standard error of the mean.
double batch_means_standard_error(std::span<const double> x, std::size_t n_batches = 50);

}  // namespace hsp
