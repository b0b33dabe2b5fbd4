#include "hsp/sample_store.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "hsp/error.hpp"

namespace hsp {

SampleStore::SampleStore(std::vector<std::string> columns) : columns_(std::move(columns)) {
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    if (!lookup_.emplace(columns_[c], c).second)
      throw ConfigError("duplicate sample column '" + columns_[c] + "'");
  }
}

void SampleStore::add_row(std::span<const double> row) {
  if (row.size() != columns_.size())
    throw DomainError("row has " + std::to_string(row.size()) + " values, expected " +
                      std::to_string(columns_.size()));
  data_.insert(data_.end(), row.begin(), row.end());
  ++n_rows_;
}

bool SampleStore::has_column(const std::string& name) const { return lookup_.count(name) > 0; }

std::size_t SampleStore::index_of(const std::string& name) const {
  auto it = lookup_.find(name);
  if (it == lookup_.end()) throw DomainError("no sample column '" + name + "'");
  return it->second;
}

std::vector<double> SampleStore::column(const std::string& name) const { return column(index_of(name)); }

std::vector<double> SampleStore::column(std::size_t c) const {
  if (c >= columns_.size()) throw DomainError("sample column index out of range");
  std::vector<double> out(n_rows_);
  for (std::size_t r = 0; r < n_rows_; ++r) out[r] = at(r, c);
  return out;
}

void SampleStore::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  for (std::size_t c = 0; c < columns_.size(); ++c) out << (c ? "," : "") << columns_[c];
  out << '\n' << std::setprecision(17);
  for (std::size_t r = 0; r < n_rows_; ++r) {
    for (std::size_t c = 0; c < columns_.size(); ++c) out << (c ? "," : "") << at(r, c);
    out << '\n';
  }
  if (!out) throw DataError("write to '" + path + "' failed");
}

SampleStore SampleStore::read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path + "' is empty");
  std::vector<std::string> cols;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
  }
  SampleStore store(cols);
  std::vector<double> row(cols.size());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t c = 0;
    while (std::getline(ss, cell, ',')) {
      if (c >= cols.size()) throw DataError(path + ": too many fields on line " + std::to_string(lineno));
      try {
        row[c] = std::stod(cell);
      } catch (const std::exception&) {
        throw DataError(path + ": bad number '" + cell + "' on line " + std::to_string(lineno));
      }
      ++c;
    }
    if (c != cols.size()) throw DataError(path + ": too few fields on line " + std::to_string(lineno));
    store.add_row(row);
  }
  return store;
}

double effective_sample_size(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 4) return static_cast<double>(n);
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += (x[i] - mean) * (x[i + lag] - mean);
    return s / static_cast<double>(n);
  };
  const double c0 = autocov(0);
  if (!(c0 > 0.0)) return static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    const double pair = autocov(2 * k) + autocov(2 * k + 1);
    if (pair <= 0.0) break;
    sum += pair;
  }
  const double tau = std::max(1.0, (2.0 * sum - c0) / c0);
  return static_cast<double>(n) / tau;
}

double batch_means_standard_error(std::span<const double> x, std::size_t n_batches) {
  if (n_batches < 2) throw DomainError("need at least two batches");
  const std::size_t len = x.size() / n_batches;
  if (len == 0) throw DomainError("too few draws for the number of batches");
  std::vector<double> means(n_batches);
  for (std::size_t b = 0; b < n_batches; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < len; ++i) s += x[b * len + i];
    means[b] = s / static_cast<double>(len);
  }
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(n_batches);
  double ss = 0.0;
  for (double m : means) ss += (m - grand) * (m - grand);
  return std::sqrt(ss / static_cast<double>(n_batches - 1) / static_cast<double>(n_batches));
}

}  // namespace hsp
