#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace archspace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Malformed or invalid input data (ragged CSV, NaN cells, shape mismatch
/// between files). Maps to CLI exit code 2.
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure produced a non-finite or degenerate result.
/// Maps to CLI exit code 3.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/**
 * Dense n x m matrix of observations (rows) by features (columns), with
 * optional column names.
 *
 * Invariants: rows >= 1, cols >= 1, every value finite, and col_names is
 * either empty or has exactly cols entries. Construct through the checked
 * constructor to have them enforced.
 */
class DataMatrix {
public:
  DataMatrix() = default;
  explicit DataMatrix(Matrix values, std::vector<std::string> col_names = {});

  /// Skips the finiteness and non-empty checks. Used for intermediate
  /// results where an empty matrix is meaningful (e.g. generating 0 points).
  static DataMatrix unchecked(Matrix values, std::vector<std::string> col_names = {});

  std::size_t rows() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values_.cols()); }
  bool empty() const { return values_.size() == 0; }

  const Matrix& values() const { return values_; }
  Matrix& mutable_values() { return values_; }
  double operator()(std::size_t r, std::size_t c) const {
    return values_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }

  const std::vector<std::string>& col_names() const { return col_names_; }
  bool has_col_names() const { return !col_names_.empty(); }
  void set_col_names(std::vector<std::string> names);

  /// Throws DataError naming the first non-finite cell.
  void validate() const;

private:
  Matrix values_;
  std::vector<std::string> col_names_;
};

inline Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

}  // namespace archspace
