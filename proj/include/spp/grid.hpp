#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace spp {

/// Upper bound on grid dimensionality; keeps per-node scratch buffers on the stack.
inline constexpr std::size_t kMaxDims = 6;

using Index = std::array<std::size_t, kMaxDims>;

/// One axis of a rectangular lattice.
///
/// Non-periodic axes include both endpoints. Periodic axes cover [lower, upper)
/// and omit the duplicate node at `upper`.
struct Axis {
  double lower = 0.0;
  double upper = 1.0;
  std::size_t count = 3;
  bool periodic = false;

  double spacing() const {
    return periodic ? (upper - lower) / static_cast<double>(count)
                    : (upper - lower) / static_cast<double>(count - 1);
  }
  double node(std::size_t k) const { return lower + static_cast<double>(k) * spacing(); }
  double period() const { return upper - lower; }

  bool operator==(const Axis&) const = default;
};

/// Rectangular computational grid. Node ordering is row-major with dimension 0
/// varying slowest; the flat index of (i0, i1, ..., iN-1) is
/// ((i0 * n1 + i1) * n2 + ...) + iN-1.
class Grid {
 public:
  /// Throws std::invalid_argument when an axis has fewer than 3 nodes, an empty
  /// range, or the dimension count is 0 or above kMaxDims.
  explicit Grid(std::vector<Axis> axes);

  std::size_t dims() const { return axes_.size(); }
  std::size_t num_nodes() const { return num_nodes_; }
  const Axis& axis(std::size_t d) const { return axes_[d]; }
  const std::vector<Axis>& axes() const { return axes_; }
  double spacing(std::size_t d) const { return axes_[d].spacing(); }
  std::size_t count(std::size_t d) const { return axes_[d].count; }
  std::size_t stride(std::size_t d) const { return strides_[d]; }

  std::size_t flat_index(std::span<const std::size_t> multi) const;
  void unravel(std::size_t flat, std::span<std::size_t> multi) const;

  /// Coordinates of a node into `out` (length >= dims()).
  void node_state(std::size_t flat, std::span<double> out) const;

  /// Length of the longest cell diagonal restricted to the first `n` dims.
  double cell_diagonal(std::size_t n) const;

  bool operator==(const Grid& other) const { return axes_ == other.axes_; }

 private:
  std::vector<Axis> axes_;
  std::vector<std::size_t> strides_;
  std::size_t num_nodes_ = 0;
};

Grid make_grid(std::vector<Axis> axes);

/// Same domain with spacing halved on every axis.
Grid refine(const Grid& grid);

/// Wraps `value` into [lower, upper) for a periodic axis.
double wrap_periodic(const Axis& axis, double value);

}  // namespace spp
