#pragma once

#include <cstddef>
#include <cstdint>
#include <iterator>
#include <span>
#include <stdexcept>
#include <vector>

namespace esr {

using LatticeIndex = std::int64_t;

class LatticeError : public std::out_of_range {
  public:
    using std::out_of_range::out_of_range;
};

/// Upward nudge applied before flooring so exact multiples of alpha land on themselves.
inline constexpr double kFloorNudge = 1e-12;

struct LatticeSpec {
    double alpha;
    std::size_t d;
    /// Per-dimension accumulated-reward cap.
    double cap;

    void check() const;
    LatticeIndex max_index() const;
};

/// Integer coordinates k; the represented vector is (k_1 alpha, ..., k_d alpha).
struct LatticePoint {
    std::vector<LatticeIndex> indices;

    friend bool operator==(const LatticePoint&, const LatticePoint&) = default;
};

/// floor(x / alpha) with the nudge.
LatticeIndex floor_index(double x, double alpha);

/// ceil((T - t) / alpha): the largest index used at t steps remaining.
LatticeIndex layer_extent(double alpha, int T, int t);

/// f_alpha: componentwise floor to alpha multiples. Throws LatticeError beyond the cap.
LatticePoint quantize(const LatticeSpec& spec, std::span<const double> r);

/// Represented real vector of a point.
std::vector<double> lattice_value(const LatticePoint& p, double alpha);

/**
 * Row-major layout of {0, ..., extent}^d. Flat index of k is
 * sum_i k_i * side^(d-1-i), side = extent + 1.
 */
class LayerGeometry {
  public:
    LayerGeometry() = default;
    LayerGeometry(std::size_t d, LatticeIndex extent);

    std::size_t dim() const { return d_; }
    LatticeIndex extent() const { return extent_; }
    std::size_t side() const { return static_cast<std::size_t>(extent_) + 1; }
    std::size_t size() const { return size_; }

    bool contains(std::span<const LatticeIndex> k) const;
    std::size_t flat_index(std::span<const LatticeIndex> k) const;
    void unflatten(std::size_t flat, std::span<LatticeIndex> out) const;

  private:
    std::size_t d_ = 0;
    LatticeIndex extent_ = 0;
    std::size_t size_ = 0;
};

/// Lexicographic range of lattice points [begin, end) within one layer; splittable.
class LayerRange {
  public:
    class iterator {
      public:
        using iterator_category = std::forward_iterator_tag;
        using value_type = LatticePoint;
        using difference_type = std::ptrdiff_t;
        using pointer = const LatticePoint*;
        using reference = const LatticePoint&;

        iterator() = default;
        iterator(const LayerGeometry* geometry, std::size_t flat);

        reference operator*() const { return point_; }
        pointer operator->() const { return &point_; }
        iterator& operator++();
        iterator operator++(int) {
            iterator copy = *this;
            ++*this;
            return copy;
        }
        std::size_t flat() const { return flat_; }
        friend bool operator==(const iterator& a, const iterator& b) { return a.flat_ == b.flat_; }

      private:
        const LayerGeometry* geometry_ = nullptr;
        std::size_t flat_ = 0;
        LatticePoint point_;
    };

    LayerRange(LayerGeometry geometry, std::size_t begin, std::size_t end);

    iterator begin() const { return {&geometry_, begin_}; }
    iterator end() const { return {&geometry_, end_}; }
    std::size_t size() const { return end_ - begin_; }
    const LayerGeometry& geometry() const { return geometry_; }

    /// The i-th of n contiguous sub-ranges.
    LayerRange split(std::size_t part, std::size_t parts) const;

  private:
    LayerGeometry geometry_;
    std::size_t begin_;
    std::size_t end_;
};

/// All points of {0, alpha, ..., ceil((T-t)/alpha) alpha}^d in lexicographic order.
LayerRange enumerate_layer(const LatticeSpec& spec, int t, int T);

}  // namespace esr
