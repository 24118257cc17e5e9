#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <sstream>
#include <string>
#include <vector>

#include "capnav/types.hpp"

namespace capnav {

/// Structured node grid with N doubles per node, x-fastest row-major.
/// Sampling is trilinear over the 8 surrounding nodes.
template <std::size_t N>
class StructuredGrid {
  public:
    using Node = std::array<double, N>;

    StructuredGrid() = default;
    StructuredGrid(std::array<int, 3> dims, Vec3 origin, Vec3 spacing, std::vector<Node> values)
        : dims_(dims), origin_(origin), spacing_(spacing), values_(std::move(values)) {
        for (int d : dims_) {
            if (d < 2) throw InvalidParameter("grid: dims must be >= 2 per axis");
        }
        for (int i = 0; i < 3; ++i) {
            if (!(spacing_[i] > 0.0) || !std::isfinite(spacing_[i])) {
                throw InvalidParameter("grid: spacing must be > 0");
            }
        }
        if (values_.size() != node_count()) {
            throw InvalidParameter("grid: value count does not match dims");
        }
    }

    const std::array<int, 3>& dims() const { return dims_; }
    const Vec3& origin() const { return origin_; }
    const Vec3& spacing() const { return spacing_; }
    const std::vector<Node>& values() const { return values_; }

    std::size_t node_count() const {
        return static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
    }
    std::size_t index(int i, int j, int k) const {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(dims_[0]) * (static_cast<std::size_t>(j) +
                                                     static_cast<std::size_t>(dims_[1]) * k);
    }
    const Node& node(int i, int j, int k) const { return values_[index(i, j, k)]; }

    Vec3 extent_max() const {
        return origin_ + Vec3((dims_[0] - 1) * spacing_[0], (dims_[1] - 1) * spacing_[1],
                              (dims_[2] - 1) * spacing_[2]);
    }

    Node sample(const Vec3& p) const {
        std::array<int, 3> cell{};
        std::array<double, 3> frac{};
        for (int a = 0; a < 3; ++a) {
            double u = (p[a] - origin_[a]) / spacing_[a];
            const double nearest = std::round(u);
            if (std::abs(u - nearest) < 1e-9) u = nearest;  // node-coincident
            if (!(u >= 0.0 && u <= dims_[a] - 1)) {
                std::ostringstream os;
                os << "grid: point (" << p.x() << ", " << p.y() << ", " << p.z()
                   << ") outside the grid";
                throw OutOfDomain(os.str());
            }
            int c = static_cast<int>(std::floor(u));
            if (c > dims_[a] - 2) c = dims_[a] - 2;
            cell[a] = c;
            frac[a] = u - c;
        }
        Node out{};
        for (int corner = 0; corner < 8; ++corner) {
            const int di = corner & 1;
            const int dj = (corner >> 1) & 1;
            const int dk = (corner >> 2) & 1;
            const double w = (di ? frac[0] : 1.0 - frac[0]) * (dj ? frac[1] : 1.0 - frac[1]) *
                             (dk ? frac[2] : 1.0 - frac[2]);
            if (w == 0.0) continue;
            const Node& v = node(cell[0] + di, cell[1] + dj, cell[2] + dk);
            for (std::size_t c = 0; c < N; ++c) out[c] += w * v[c];
        }
        return out;
    }

  private:
    std::array<int, 3> dims_{2, 2, 2};
    Vec3 origin_ = Vec3::Zero();
    Vec3 spacing_ = Vec3::Ones();
    std::vector<Node> values_;
};

namespace detail {

/// Raw contents of a VFIELD/BFIELD style file.
struct GridText {
    std::array<int, 3> dims{};
    Vec3 origin;
    Vec3 spacing;
    std::vector<double> values;  // row-major, `width` per node
};

GridText read_grid_text(std::istream& in, const std::string& source, const std::string& magic,
                        std::size_t width);
void write_grid_text(std::ostream& out, const std::string& magic, const std::array<int, 3>& dims,
                     const Vec3& origin, const Vec3& spacing, const std::vector<double>& values,
                     std::size_t width);

}  // namespace detail

}  // namespace capnav
