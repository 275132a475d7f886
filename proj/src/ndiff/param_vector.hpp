#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace pgvlab::ndiff {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;

struct Segment {
  std::string name;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::size_t offset = 0;

  std::size_t size() const { return static_cast<std::size_t>(rows * cols); }
};

/// Flat store of 64-bit parameters partitioned into named row-major matrices.
class ParamVector {
 public:
  ParamVector() = default;

  /// Appends a zero-initialized segment and returns its index.
  std::size_t add_segment(std::string name, Eigen::Index rows, Eigen::Index cols);

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  const std::vector<Segment>& layout() const { return layout_; }
  const Segment& segment(std::size_t i) const { return layout_.at(i); }
  std::size_t segment_index(const std::string& name) const;

  MatrixMap matrix(std::size_t segment);
  ConstMatrixMap matrix(std::size_t segment) const;

  ParamVector zeros_like() const;
  bool same_layout(const ParamVector& other) const;
  bool all_finite() const;

  void fill(double value);
  /// this += scale * other (layouts must match).
  void axpy(double scale, const ParamVector& other);
  double squared_norm() const;

  bool operator==(const ParamVector& other) const {
    return values_ == other.values_ && same_layout(other);
  }

 private:
  std::vector<double> values_;
  std::vector<Segment> layout_;
};

}  // namespace pgvlab::ndiff
