#include "esr/lattice.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace esr {

namespace {

// Tolerance for treating (T - t) / alpha as an integer before taking the ceiling.
constexpr double kCeilNudge = 1e-9;

}  // namespace

void LatticeSpec::check() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("lattice alpha must be positive");
    if (d == 0) throw std::invalid_argument("lattice dimension must be positive");
    if (!(cap >= 0.0)) throw std::invalid_argument("lattice cap must be nonnegative");
}

LatticeIndex LatticeSpec::max_index() const {
    return static_cast<LatticeIndex>(std::ceil(cap / alpha - kCeilNudge));
}

LatticeIndex floor_index(double x, double alpha) {
    return static_cast<LatticeIndex>(std::floor(x / alpha + kFloorNudge));
}

LatticeIndex layer_extent(double alpha, int T, int t) {
    if (t < 0 || t > T) throw std::out_of_range("layer index outside [0, T]");
    if (T == t) return 0;
    return static_cast<LatticeIndex>(std::ceil(static_cast<double>(T - t) / alpha - kCeilNudge));
}

LatticePoint quantize(const LatticeSpec& spec, std::span<const double> r) {
    spec.check();
    if (r.size() != spec.d) throw std::invalid_argument("reward vector dimension does not match lattice");
    const LatticeIndex limit = spec.max_index();
    LatticePoint p;
    p.indices.resize(spec.d);
    for (std::size_t i = 0; i < spec.d; ++i) {
        if (!(r[i] >= 0.0)) throw std::invalid_argument("cannot quantize a negative reward component");
        const LatticeIndex k = floor_index(r[i], spec.alpha);
        if (k > limit)
            throw LatticeError("accumulated reward " + std::to_string(r[i]) + " exceeds lattice cap " +
                               std::to_string(spec.cap));
        p.indices[i] = k;
    }
    return p;
}

std::vector<double> lattice_value(const LatticePoint& p, double alpha) {
    std::vector<double> out(p.indices.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<double>(p.indices[i]) * alpha;
    return out;
}

LayerGeometry::LayerGeometry(std::size_t d, LatticeIndex extent) : d_(d), extent_(extent) {
    if (extent < 0) throw std::invalid_argument("negative layer extent");
    size_ = 1;
    for (std::size_t i = 0; i < d; ++i) {
        if (size_ > std::numeric_limits<std::size_t>::max() / side())
            throw LatticeError("lattice layer too large to index");
        size_ *= side();
    }
}

bool LayerGeometry::contains(std::span<const LatticeIndex> k) const {
    for (LatticeIndex x : k) {
        if (x < 0 || x > extent_) return false;
    }
    return true;
}

std::size_t LayerGeometry::flat_index(std::span<const LatticeIndex> k) const {
    std::size_t flat = 0;
    for (std::size_t i = 0; i < d_; ++i) flat = flat * side() + static_cast<std::size_t>(k[i]);
    return flat;
}

void LayerGeometry::unflatten(std::size_t flat, std::span<LatticeIndex> out) const {
    for (std::size_t i = d_; i-- > 0;) {
        out[i] = static_cast<LatticeIndex>(flat % side());
        flat /= side();
    }
}

LayerRange::iterator::iterator(const LayerGeometry* geometry, std::size_t flat)
    : geometry_(geometry), flat_(flat) {
    point_.indices.assign(geometry->dim(), 0);
    if (flat < geometry->size()) geometry->unflatten(flat, point_.indices);
}

LayerRange::iterator& LayerRange::iterator::operator++() {
    ++flat_;
    // Mixed-radix increment, last coordinate fastest.
    for (std::size_t i = point_.indices.size(); i-- > 0;) {
        if (++point_.indices[i] <= geometry_->extent()) break;
        point_.indices[i] = 0;
    }
    return *this;
}

LayerRange::LayerRange(LayerGeometry geometry, std::size_t begin, std::size_t end)
    : geometry_(geometry), begin_(begin), end_(end) {
    if (begin > end || end > geometry_.size()) throw std::out_of_range("invalid layer range");
}

LayerRange LayerRange::split(std::size_t part, std::size_t parts) const {
    if (parts == 0 || part >= parts) throw std::out_of_range("invalid split");
    const std::size_t n = size();
    const std::size_t lo = begin_ + n * part / parts;
    const std::size_t hi = begin_ + n * (part + 1) / parts;
    return {geometry_, lo, hi};
}

LayerRange enumerate_layer(const LatticeSpec& spec, int t, int T) {
    spec.check();
    LayerGeometry geometry(spec.d, layer_extent(spec.alpha, T, t));
    return {geometry, 0, geometry.size()};
}

}  // namespace esr
