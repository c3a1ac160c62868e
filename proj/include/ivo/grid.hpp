#pragma once

#include <Eigen/Core>

#include <cstdint>

namespace ivo {

// Dense row-major image grid, indexed (row, col) = (y, x).
template <typename T>
using Grid = Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using GridF = Grid<float>;
using GridD = Grid<double>;
using GridU8 = Grid<std::uint8_t>;
using GridU16 = Grid<std::uint16_t>;

}  // namespace ivo
