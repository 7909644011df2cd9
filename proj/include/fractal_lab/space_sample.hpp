#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fractal_lab/error.hpp"

namespace fractal_lab {

using PointId = std::size_t;
// Point subsets are kept sorted and duplicate free.
using PointSet = std::vector<PointId>;

enum class MetricKind { euclidean, snowflake, table };

inline const char* to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::euclidean: return "euclidean";
    case MetricKind::snowflake: return "snowflake";
    case MetricKind::table: return "table";
  }
  return "?";
}

// Open ball B(center, radius); membership is metric(center, .) < radius.
struct Ball {
  PointId center = 0;
  double radius = 1.0;

  Ball() = default;
  Ball(PointId c, double r) : center(c), radius(r) {
    if (!(r > 0.0) || !std::isfinite(r)) throw InvalidInput("ball radius must be finite and positive");
  }

  // lambda * B in the usual notation.
  Ball scaled(double lambda) const { return Ball(center, radius * lambda); }
};

// A finite sample of a compact metric space. The metric is either the
// Euclidean distance on stored coordinates or an explicit distance table,
// optionally raised to a snowflake exponent in (0, 1]. Instances are
// immutable; copies share storage.
class SpaceSample {
 public:
  SpaceSample() : data_(std::make_shared<Data>()) {}

  static SpaceSample euclidean(std::vector<double> coords, std::size_t dim, std::string label = {}) {
    if (dim == 0) throw InvalidInput("coordinate dimension must be positive");
    if (coords.size() % dim != 0) throw InvalidInput("coordinate array length is not a multiple of the dimension");
    for (double c : coords)
      if (!std::isfinite(c)) throw InvalidInput("coordinates must be finite");
    auto data = std::make_shared<Data>();
    data->dim = dim;
    data->n = coords.size() / dim;
    data->coords = std::move(coords);
    data->build_sweep_index();
    data->reject_duplicates();
    SpaceSample s;
    s.data_ = std::move(data);
    s.label_ = std::move(label);
    return s;
  }

  // Row-major n x n table. Must be symmetric with zero diagonal and positive
  // off-diagonal entries; the triangle inequality is checked by the loaders.
  static SpaceSample from_table(std::vector<double> table, std::size_t n, std::string label = {}) {
    if (table.size() != n * n) throw InvalidInput("distance table must be n x n");
    for (std::size_t i = 0; i < n; ++i) {
      if (table[i * n + i] != 0.0) throw InvalidInput("distance table diagonal must be zero");
      for (std::size_t j = i + 1; j < n; ++j) {
        double a = table[i * n + j];
        double b = table[j * n + i];
        if (!std::isfinite(a) || !(a > 0.0))
          throw InvalidInput("distance between distinct points must be finite and positive");
        if (a != b) throw InvalidInput("distance table is not symmetric");
      }
    }
    auto data = std::make_shared<Data>();
    data->n = n;
    data->table = std::move(table);
    SpaceSample s;
    s.data_ = std::move(data);
    s.label_ = std::move(label);
    return s;
  }

  // Same points with metric d^alpha. Composes: snowflake(a).snowflake(b)
  // carries exponent a*b.
  SpaceSample snowflake(double alpha) const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("snowflake exponent must lie in (0,1)");
    SpaceSample s = *this;
    s.exponent_ = exponent_ * alpha;
    return s;
  }

  SpaceSample with_weights(std::vector<double> weights) const {
    if (weights.size() != size()) throw InvalidInput("weight count does not match point count");
    double total = 0.0;
    for (double w : weights) {
      if (!std::isfinite(w) || w < 0.0) throw InvalidInput("weights must be finite and nonnegative");
      total += w;
    }
    if (!(total > 0.0)) throw InvalidInput("weights must have positive total mass");
    SpaceSample s = *this;
    s.weights_ = std::make_shared<const std::vector<double>>(std::move(weights));
    return s;
  }

  SpaceSample without_weights() const {
    SpaceSample s = *this;
    s.weights_.reset();
    return s;
  }

  SpaceSample with_ids(std::vector<std::string> ids) const {
    if (ids.size() != size()) throw InvalidInput("id count does not match point count");
    SpaceSample s = *this;
    s.ids_ = std::make_shared<const std::vector<std::string>>(std::move(ids));
    return s;
  }

  SpaceSample with_label(std::string label) const {
    SpaceSample s = *this;
    s.label_ = std::move(label);
    return s;
  }

  std::size_t size() const noexcept { return data_->n; }
  bool empty() const noexcept { return data_->n == 0; }
  bool contains(PointId p) const noexcept { return p < data_->n; }
  bool has_coordinates() const noexcept { return data_->dim > 0; }
  std::size_t dim() const noexcept { return data_->dim; }
  double exponent() const noexcept { return exponent_; }
  const std::string& label() const noexcept { return label_; }

  MetricKind kind() const noexcept {
    if (!has_coordinates()) return MetricKind::table;
    return exponent_ == 1.0 ? MetricKind::euclidean : MetricKind::snowflake;
  }

  std::span<const double> coordinates(PointId p) const {
    return {data_->coords.data() + p * data_->dim, data_->dim};
  }
  std::span<const double> all_coordinates() const noexcept { return data_->coords; }
  std::span<const double> table() const noexcept { return data_->table; }

  bool has_weights() const noexcept { return static_cast<bool>(weights_); }
  std::span<const double> weights() const noexcept {
    if (!weights_) return {};
    return *weights_;
  }
  double weight(PointId p) const { return weights_ ? (*weights_)[p] : 1.0; }

  bool has_ids() const noexcept { return static_cast<bool>(ids_); }
  std::string id(PointId p) const { return ids_ ? (*ids_)[p] : std::to_string(p); }

  // Distance before the snowflake exponent is applied.
  double base_distance(PointId a, PointId b) const {
    const Data& d = *data_;
    if (d.dim == 0) return d.table[a * d.n + b];
    const double* x = d.coords.data() + a * d.dim;
    const double* y = d.coords.data() + b * d.dim;
    if (d.dim == 1) return std::abs(x[0] - y[0]);
    double acc = 0.0;
    for (std::size_t i = 0; i < d.dim; ++i) {
      double diff = x[i] - y[i];
      acc += diff * diff;
    }
    return std::sqrt(acc);
  }

  double distance(PointId a, PointId b) const {
    double base = base_distance(a, b);
    return exponent_ == 1.0 ? base : std::pow(base, exponent_);
  }

  // Visits every point q with distance(center, q) < radius (or <= when
  // closed). Visit order is unspecified.
  template <class Fn>
  void for_each_within(PointId center, double radius, bool closed, Fn&& fn) const {
    auto accept = [&](PointId q) {
      double dq = distance(center, q);
      if (closed ? dq <= radius : dq < radius) fn(q);
    };
    const Data& d = *data_;
    if (d.dim == 0) {
      for (PointId q = 0; q < d.n; ++q) accept(q);
      return;
    }
    // Candidate window on the first coordinate; the exact test above decides.
    double reach = exponent_ == 1.0 ? radius : std::pow(radius, 1.0 / exponent_);
    reach = reach * (1.0 + 1e-9) + 1e-300;
    double x0 = d.coords[center * d.dim];
    auto lo = std::lower_bound(d.sweep_keys.begin(), d.sweep_keys.end(), x0 - reach);
    auto hi = std::upper_bound(lo, d.sweep_keys.end(), x0 + reach);
    for (auto it = lo; it != hi; ++it) accept(d.sweep_order[static_cast<std::size_t>(it - d.sweep_keys.begin())]);
  }

  // Sorted ids of points within the ball.
  PointSet points_within(PointId center, double radius, bool closed = false) const {
    PointSet out;
    for_each_within(center, radius, closed, [&](PointId q) { out.push_back(q); });
    std::sort(out.begin(), out.end());
    return out;
  }

  // Points sorted by first coordinate, for sweep-style neighbour searches.
  std::span<const PointId> sweep_order() const noexcept { return data_->sweep_order; }
  // Lower bound on the first-coordinate gap that a distance below `radius` allows.
  double sweep_reach(double radius) const {
    double reach = exponent_ == 1.0 ? radius : std::pow(radius, 1.0 / exponent_);
    return reach * (1.0 + 1e-9) + 1e-300;
  }

  PointSet all_points() const {
    PointSet all(size());
    std::iota(all.begin(), all.end(), PointId{0});
    return all;
  }

 private:
  struct Data {
    std::size_t n = 0;
    std::size_t dim = 0;
    std::vector<double> coords;
    std::vector<double> table;
    std::vector<PointId> sweep_order;
    std::vector<double> sweep_keys;

    void build_sweep_index() {
      sweep_order.resize(n);
      std::iota(sweep_order.begin(), sweep_order.end(), PointId{0});
      std::stable_sort(sweep_order.begin(), sweep_order.end(),
                       [&](PointId a, PointId b) { return coords[a * dim] < coords[b * dim]; });
      sweep_keys.resize(n);
      for (std::size_t i = 0; i < n; ++i) sweep_keys[i] = coords[sweep_order[i] * dim];
    }

    void reject_duplicates() const {
      std::vector<PointId> order(n);
      std::iota(order.begin(), order.end(), PointId{0});
      auto row = [&](PointId p) { return coords.begin() + static_cast<std::ptrdiff_t>(p * dim); };
      std::sort(order.begin(), order.end(), [&](PointId a, PointId b) {
        return std::lexicographical_compare(row(a), row(a) + static_cast<std::ptrdiff_t>(dim), row(b),
                                            row(b) + static_cast<std::ptrdiff_t>(dim));
      });
      for (std::size_t i = 1; i < n; ++i)
        if (std::equal(row(order[i - 1]), row(order[i - 1]) + static_cast<std::ptrdiff_t>(dim), row(order[i])))
          throw InvalidInput("duplicate point in sample (points " + std::to_string(order[i - 1]) + " and " +
                             std::to_string(order[i]) + ")");
    }
  };

  std::shared_ptr<const Data> data_;
  double exponent_ = 1.0;
  std::shared_ptr<const std::vector<double>> weights_;
  std::shared_ptr<const std::vector<std::string>> ids_;
  std::string label_;
};

}  // namespace fractal_lab
