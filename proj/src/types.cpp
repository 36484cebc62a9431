#include "archspace/types.hpp"

#include <cmath>
#include <sstream>

namespace archspace {

DataMatrix::DataMatrix(Matrix values, std::vector<std::string> col_names)
    : values_(std::move(values)) {
  if (values_.rows() < 1 || values_.cols() < 1) {
    throw DataError("data matrix must have at least one row and one column");
  }
  set_col_names(std::move(col_names));
  validate();
}

DataMatrix DataMatrix::unchecked(Matrix values, std::vector<std::string> col_names) {
  DataMatrix m;
  m.values_ = std::move(values);
  m.set_col_names(std::move(col_names));
  return m;
}

void DataMatrix::set_col_names(std::vector<std::string> names) {
  if (!names.empty() && names.size() != cols()) {
    std::ostringstream os;
    os << "expected " << cols() << " column names, got " << names.size();
    throw DataError(os.str());
  }
  col_names_ = std::move(names);
}

void DataMatrix::validate() const {
  for (Eigen::Index r = 0; r < values_.rows(); ++r) {
    for (Eigen::Index c = 0; c < values_.cols(); ++c) {
      if (!std::isfinite(values_(r, c))) {
        std::ostringstream os;
        os << "non-finite value at row " << r + 1 << ", column " << c + 1;
        throw DataError(os.str());
      }
    }
  }
}

}  // namespace archspace
