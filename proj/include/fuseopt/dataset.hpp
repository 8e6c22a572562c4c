#ifndef FUSEOPT_DATASET_HPP
#define FUSEOPT_DATASET_HPP

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fuseopt/errors.hpp"
#include "fuseopt/point.hpp"
#include "fuseopt/rng.hpp"

namespace fuseopt {

/// n samples with d_feat real features and one label each (class index
/// or real target, stored as double either way).
class Dataset {
 public:
  Dataset(Matrix features, std::vector<double> labels)
      : features_(std::move(features)), labels_(std::move(labels)) {
    if (features_.rows() != labels_.size()) {
      throw invalid_input_error("feature row count (" + std::to_string(features_.rows()) +
                                ") != label count (" + std::to_string(labels_.size()) + ")");
    }
    for (std::size_t i = 0; i < features_.rows(); ++i) {
      for (std::size_t j = 0; j < features_.cols(); ++j) {
        if (!std::isfinite(features_(i, j))) {
          throw numeric_error("non-finite feature at row " + std::to_string(i));
        }
      }
      if (!std::isfinite(labels_[i])) {
        throw numeric_error("non-finite label at row " + std::to_string(i));
      }
    }
  }

  std::size_t size() const { return labels_.size(); }
  std::size_t feature_dim() const { return features_.cols(); }
  const Matrix& features() const { return features_; }
  const std::vector<double>& labels() const { return labels_; }
  double feature(std::size_t row, std::size_t col) const { return features_(row, col); }
  double label(std::size_t row) const { return labels_[row]; }

  /// New dataset holding the given rows, in the given order.
  Dataset subset(const std::vector<std::size_t>& rows) const {
    if (rows.empty()) throw invalid_input_error("subset must keep at least one row");
    Matrix f(rows.size(), feature_dim());
    std::vector<double> l(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i] >= size()) throw invalid_input_error("subset row out of range");
      for (std::size_t j = 0; j < feature_dim(); ++j) f(i, j) = feature(rows[i], j);
      l[i] = label(rows[i]);
    }
    return Dataset(std::move(f), std::move(l));
  }

  bool operator==(const Dataset& other) const {
    if (size() != other.size() || feature_dim() != other.feature_dim()) return false;
    for (std::size_t i = 0; i < size(); ++i) {
      if (labels_[i] != other.labels_[i]) return false;
      for (std::size_t j = 0; j < feature_dim(); ++j) {
        if (features_(i, j) != other.features_(i, j)) return false;
      }
    }
    return true;
  }

 private:
  Matrix features_;
  std::vector<double> labels_;
};

/// Two spherical Gaussian clusters with means at +/-(separation/2) along a
/// seeded random unit direction, labels 0 (first n/2 rows) and 1 (rest).
/// Deterministic per seed: same seed, byte-identical dataset.
inline Dataset make_synthetic_classification(std::size_t n, std::size_t d,
                                             double separation, std::uint64_t seed) {
  if (n < 2) throw invalid_input_error("need at least 2 samples");
  if (d < 1) throw invalid_input_error("need at least 1 feature");
  if (separation < 0.0) throw invalid_input_error("separation must be >= 0");

  Xoshiro256StarStar rng(seed);
  std::vector<double> u(d);
  double u_norm = 0.0;
  do {
    u_norm = 0.0;
    for (auto& ui : u) {
      ui = rng.gaussian();
      u_norm += ui * ui;
    }
    u_norm = std::sqrt(u_norm);
  } while (u_norm == 0.0);
  for (auto& ui : u) ui /= u_norm;

  const std::size_t n0 = n / 2;
  Matrix features(n, d);
  std::vector<double> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double cls = i < n0 ? 0.0 : 1.0;
    const double sign = cls == 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      features(i, j) = sign * (separation / 2.0) * u[j] + rng.gaussian();
    }
    labels[i] = cls;
  }
  return Dataset(std::move(features), std::move(labels));
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

inline double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
  std::size_t lo = 0, hi = cell.size();
  while (lo < hi && std::isspace(static_cast<unsigned char>(cell[lo]))) ++lo;
  while (hi > lo && std::isspace(static_cast<unsigned char>(cell[hi - 1]))) --hi;
  double value = 0.0;
  const char* first = cell.data() + lo;
  const char* last = cell.data() + hi;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last) {
    throw parse_error("non-numeric cell at data row " + std::to_string(row) +
                      ", column " + std::to_string(col) + ": '" + cell + "'");
  }
  return value;
}

}  // namespace detail

/// UTF-8, comma-separated, first line header, no quoting, no missing values.
/// The named column becomes labels; the remaining columns become features in
/// header order; row order is preserved.
inline Dataset load_csv_dataset(const std::string& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open dataset file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw schema_error("empty file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = detail::split_csv_line(line);
  std::size_t label_col = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == label_column) {
      label_col = i;
      break;
    }
  }
  if (label_col == header.size()) {
    throw schema_error("label column '" + label_column + "' not found in header");
  }
  const std::size_t d_feat = header.size() - 1;
  if (d_feat == 0) throw schema_error("no feature columns besides the label");

  std::vector<std::vector<double>> rows;
  std::vector<double> labels;
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) {
      throw schema_error("data row " + std::to_string(row_no) + " has " +
                         std::to_string(cells.size()) + " cells, header has " +
                         std::to_string(header.size()));
    }
    std::vector<double> feat(d_feat);
    std::size_t k = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const double v = detail::parse_cell(cells[c], row_no, c);
      if (c == label_col) {
        labels.push_back(v);
      } else {
        feat[k++] = v;
      }
    }
    rows.push_back(std::move(feat));
    ++row_no;
  }
  if (rows.empty()) throw schema_error("dataset has no data rows: " + path);

  Matrix features(rows.size(), d_feat);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < d_feat; ++j) features(i, j) = rows[i][j];
  return Dataset(std::move(features), std::move(labels));
}

/// Inverse of load_csv_dataset: header f1..fd plus the label column, every
/// value with 17 significant digits so a reload reproduces the dataset.
inline void save_csv_dataset(const Dataset& data, const std::string& path,
                             const std::string& label_column = "label") {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open file for writing: " + path);
  for (std::size_t j = 0; j < data.feature_dim(); ++j) out << "f" << (j + 1) << ",";
  out << label_column << "\n";
  char buf[64];
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < data.feature_dim(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", data.feature(i, j));
      out << buf << ",";
    }
    std::snprintf(buf, sizeof(buf), "%.17g", data.label(i));
    out << buf << "\n";
  }
  if (!out) throw io_error("write failed: " + path);
}

}  // namespace fuseopt

#endif  // FUSEOPT_DATASET_HPP
