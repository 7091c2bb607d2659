#ifndef SOLSTAB_TYPES_HPP
#define SOLSTAB_TYPES_HPP

#include <Eigen/Core>

#include <complex>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace solstab {

using Scalar = double;
using Complex = std::complex<Scalar>;
using ArrayX = Eigen::ArrayXd;
using ArrayXc = Eigen::ArrayXcd;
using VectorX = Eigen::VectorXd;
using VectorXc = Eigen::VectorXcd;
using MatrixX = Eigen::MatrixXd;
using MatrixXc = Eigen::MatrixXcd;

/// Invalid configuration or precondition violation (CLI exit code 1).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure at runtime: blow-up, overflow, singular solve (CLI exit code 2).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, double t = 0.0)
      : std::runtime_error(what), time(t) {}
  double time;  // simulation time at failure, when meaningful
};

/// Column-labelled time series. Rows are appended in time order.
struct TimeSeries {
  std::vector<double> times;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> values;

  void append(double t, std::initializer_list<double> row) {
    append(t, std::vector<double>(row));
  }
  void append(double t, std::vector<double> row) {
    if (!times.empty() && t <= times.back())
      throw ValidationError("TimeSeries: times must be strictly increasing");
    if (!columns.empty() && row.size() != columns.size())
      throw ValidationError("TimeSeries: row width does not match columns");
    times.push_back(t);
    values.push_back(std::move(row));
  }
  std::size_t size() const { return times.size(); }
  /// Values of one named column across all rows.
  std::vector<double> column(const std::string& name) const {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (columns[j] == name) {
        std::vector<double> out(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i][j];
        return out;
      }
    }
    throw ValidationError("TimeSeries: no column named " + name);
  }
};

}  // namespace solstab

#endif
