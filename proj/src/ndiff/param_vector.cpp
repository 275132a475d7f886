#include "ndiff/param_vector.hpp"

#include "common/error.hpp"

#include <cmath>

namespace pgvlab::ndiff {

std::size_t ParamVector::add_segment(std::string name, Eigen::Index rows, Eigen::Index cols) {
  require_shape(rows >= 1 && cols >= 1, "segment '" + name + "' must have positive dimensions");
  Segment seg{std::move(name), rows, cols, values_.size()};
  values_.resize(values_.size() + seg.size(), 0.0);
  layout_.push_back(std::move(seg));
  return layout_.size() - 1;
}

std::size_t ParamVector::segment_index(const std::string& name) const {
  for (std::size_t i = 0; i < layout_.size(); ++i) {
    if (layout_[i].name == name) return i;
  }
  throw ShapeError("no parameter segment named '" + name + "'");
}

MatrixMap ParamVector::matrix(std::size_t segment) {
  const Segment& seg = layout_.at(segment);
  return MatrixMap(values_.data() + seg.offset, seg.rows, seg.cols);
}

ConstMatrixMap ParamVector::matrix(std::size_t segment) const {
  const Segment& seg = layout_.at(segment);
  return ConstMatrixMap(values_.data() + seg.offset, seg.rows, seg.cols);
}

ParamVector ParamVector::zeros_like() const {
  ParamVector out;
  out.layout_ = layout_;
  out.values_.assign(values_.size(), 0.0);
  return out;
}

bool ParamVector::same_layout(const ParamVector& other) const {
  if (layout_.size() != other.layout_.size()) return false;
  for (std::size_t i = 0; i < layout_.size(); ++i) {
    const Segment& a = layout_[i];
    const Segment& b = other.layout_[i];
    if (a.rows != b.rows || a.cols != b.cols || a.offset != b.offset) return false;
  }
  return true;
}

bool ParamVector::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void ParamVector::fill(double value) { std::fill(values_.begin(), values_.end(), value); }

void ParamVector::axpy(double scale, const ParamVector& other) {
  require_shape(same_layout(other), "axpy: parameter layouts differ");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += scale * other.values_[i];
}

double ParamVector::squared_norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return s;
}

}  // namespace pgvlab::ndiff
