// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

namespace kgspec
{

// Uniform periodic tensor grid on the torus. Flat index is row-major with the
// last axis fastest; node k on axis i sits at k * L_i / M_i.
class SpectralGrid
{
public:
  SpectralGrid() = default;
  SpectralGrid(std::vector<int> points, std::vector<double> lengths);

  int dim() const { return static_cast<int>(points_.size()); }
  const std::vector<int> &points() const { return points_; }
  const std::vector<double> &lengths() const { return lengths_; }
  int points(int axis) const { return points_[axis]; }
  double length(int axis) const { return lengths_[axis]; }
  std::size_t size() const { return size_; }
  std::size_t stride(int axis) const { return strides_[axis]; }
  double cell_volume() const;

  // Multi-index of a flat index.
  void index(std::size_t flat, int *multi) const;
  void node(std::size_t flat, double *x) const;

private:
  std::vector<int> points_;
  std::vector<double> lengths_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
};

}  // namespace kgspec
