#pragma once

#include "vmsfem/fields.hpp"
#include "vmsfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace vmsfem {

struct KernelParams {
  double r0 = 1.0;
  double re = 2.5;

  /// r0 = h, re = 2.5 h with h = min(hx, hy).
  static KernelParams defaults(const GridMesh& mesh);
  void validate() const;
};

/// exp(-(r/r0)^2) / sqrt(2 pi) for r <= re, 0 beyond.
double gaussian_weight(double r, const KernelParams& params);

struct SamplePointCloud {
  std::vector<Vec2> positions;

  [[nodiscard]] std::size_t count() const { return positions.size(); }
  /// One point per 2x2 Gauss point, index 4*elem + q.
  static SamplePointCloud gauss_points(const GridMesh& mesh);
};

/// History carried by the sample points. gamma_rate is a per-step diagnostic
/// (maximum shear strain rate) and is not transported.
struct HistoryState {
  std::vector<SymTensor2> sigma;
  std::vector<double> xi;
  std::vector<double> y0;
  std::vector<double> gamma_rate;
  double time = 0.0;

  static HistoryState zeros(std::size_t count);
  [[nodiscard]] std::size_t size() const { return sigma.size(); }
  [[nodiscard]] bool consistent() const;
  [[nodiscard]] bool finite() const;
};

/// Positions advanced by u dt; points leaving the grid are clamped onto it.
SamplePointCloud convect_positions(const SamplePointCloud& cloud, const VelocityView& u, double dt,
                                   int* clamped = nullptr);

/// Uniform binning of a fixed point set for radius queries.
class PointBins {
 public:
  PointBins(const std::vector<Vec2>& points, double cell);

  /// Calls f(id, distance) for every point with distance <= radius.
  template <class F>
  void visit(const Vec2& center, double radius, F&& f) const;
  [[nodiscard]] std::vector<int> query(const Vec2& center, double radius) const;

 private:
  const std::vector<Vec2>* points_;
  double cell_;
  Vec2 lo_;
  int nx_ = 1;
  int ny_ = 1;
  std::vector<int> start_;
  std::vector<int> ids_;
};

template <class F>
void PointBins::visit(const Vec2& center, double radius, F&& f) const {
  if (ids_.empty()) return;
  const int x0 = std::max(0, static_cast<int>(std::floor((center.x() - radius - lo_.x()) / cell_)));
  const int x1 = std::min(nx_ - 1, static_cast<int>(std::floor((center.x() + radius - lo_.x()) / cell_)));
  const int y0 = std::max(0, static_cast<int>(std::floor((center.y() - radius - lo_.y()) / cell_)));
  const int y1 = std::min(ny_ - 1, static_cast<int>(std::floor((center.y() + radius - lo_.y()) / cell_)));
  const std::vector<Vec2>& pts = *points_;
  const double r2 = radius * radius;
  for (int by = y0; by <= y1; ++by) {
    for (int bx = x0; bx <= x1; ++bx) {
      const auto c = static_cast<std::size_t>(bx + nx_ * by);
      for (int k = start_[c]; k < start_[c + 1]; ++k) {
        const int id = ids_[static_cast<std::size_t>(k)];
        const double d2 = (pts[static_cast<std::size_t>(id)] - center).squaredNorm();
        if (d2 <= r2) f(id, std::sqrt(d2));
      }
    }
  }
}

/// Ids of cloud points within re of center (sorted).
std::vector<int> neighbor_query(const SamplePointCloud& cloud, const Vec2& center, double re);

struct TransportStats {
  int fallbacks = 0;
  int clamped = 0;
};

/// Weighted average onto the fixed `sources` of the channels carried by the
/// field points at `field_positions`. Field points with active[n] == 0 do not
/// contribute. Sources with an empty neighbourhood take the nearest active
/// field point's values.
HistoryState nonlocal_average(const HistoryState& history, const std::vector<Vec2>& sources,
                              const std::vector<Vec2>& field_positions, const KernelParams& params,
                              TransportStats* stats = nullptr, const std::vector<char>* active = nullptr);

/// Convects the field points (initially at the source positions) with u over
/// dt, then averages back onto the fixed sources. A source whose own field
/// point is inactive keeps its values.
HistoryState nonlocal_transport(const HistoryState& history, const SamplePointCloud& cloud, const VelocityView& u,
                                double dt, const KernelParams& params, TransportStats* stats = nullptr,
                                const std::vector<char>* active = nullptr);

}  // namespace vmsfem
