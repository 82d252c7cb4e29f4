#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "shc/error.hpp"

namespace shc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// N observations by p variables, optionally labeled. All entries finite.
struct DataMatrix {
  Matrix values;  // N x p
  std::optional<std::vector<std::string>> row_labels;
  std::optional<std::vector<std::string>> col_labels;

  int n_obs() const { return static_cast<int>(values.rows()); }
  int n_vars() const { return static_cast<int>(values.cols()); }

  void validate() const {
    if (values.rows() < 1 || values.cols() < 1)
      throw InvalidData("DataMatrix: need at least 1 observation and 1 variable");
    if (!values.allFinite())
      throw InvalidData("DataMatrix: non-finite entry");
    if (row_labels) {
      if (static_cast<int>(row_labels->size()) != n_obs())
        throw InvalidData("DataMatrix: row_labels length != N");
      std::unordered_set<std::string> seen;
      for (const auto& l : *row_labels)
        if (!seen.insert(l).second)
          throw InvalidData("DataMatrix: duplicate row label '" + l + "'");
    }
    if (col_labels && static_cast<int>(col_labels->size()) != n_vars())
      throw InvalidData("DataMatrix: col_labels length != p");
  }

  DataMatrix subset_rows(const std::vector<int>& rows) const {
    DataMatrix out;
    out.values.resize(static_cast<Eigen::Index>(rows.size()), values.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
      out.values.row(static_cast<Eigen::Index>(i)) = values.row(rows[i]);
    if (row_labels) {
      std::vector<std::string> labels;
      labels.reserve(rows.size());
      for (int r : rows) labels.push_back((*row_labels)[static_cast<std::size_t>(r)]);
      out.row_labels = std::move(labels);
    }
    out.col_labels = col_labels;
    return out;
  }
};

}  // namespace shc
