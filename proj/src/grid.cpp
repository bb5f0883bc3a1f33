// SPDX-License-Identifier: Apache-2.0

#include "kgspec/grid.hpp"

#include "kgspec/errors.hpp"

namespace kgspec
{

SpectralGrid::SpectralGrid(std::vector<int> points, std::vector<double> lengths)
  : points_(std::move(points)), lengths_(std::move(lengths))
{
  if (points_.empty() || points_.size() != lengths_.size())
  {
    throw ConfigError("grid: need one point count per torus axis");
  }
  for (std::size_t i = 0; i < points_.size(); i++)
  {
    if (points_[i] < 8 || points_[i] % 2 != 0)
    {
      throw ConfigError("grid: points per axis must be even and >= 8, got " +
                        std::to_string(points_[i]));
    }
    if (!(lengths_[i] > 0.0))
    {
      throw ConfigError("grid: torus lengths must be positive");
    }
  }
  strides_.assign(points_.size(), 1);
  for (std::size_t i = points_.size() - 1; i-- > 0;)
  {
    strides_[i] = strides_[i + 1] * static_cast<std::size_t>(points_[i + 1]);
  }
  size_ = strides_[0] * static_cast<std::size_t>(points_[0]);
}

double SpectralGrid::cell_volume() const
{
  double v = 1.0;
  for (std::size_t i = 0; i < points_.size(); i++)
  {
    v *= lengths_[i] / points_[i];
  }
  return v;
}

void SpectralGrid::index(std::size_t flat, int *multi) const
{
  for (std::size_t i = 0; i < points_.size(); i++)
  {
    multi[i] = static_cast<int>(flat / strides_[i]);
    flat %= strides_[i];
  }
}

void SpectralGrid::node(std::size_t flat, double *x) const
{
  for (std::size_t i = 0; i < points_.size(); i++)
  {
    const auto k = flat / strides_[i];
    flat %= strides_[i];
    x[i] = static_cast<double>(k) * lengths_[i] / points_[i];
  }
}

}  // namespace kgspec
