#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fractal_lab/error.hpp"
#include "fractal_lab/holder_analysis.hpp"
#include "fractal_lab/numeric_text.hpp"
#include "fractal_lab/space_sample.hpp"

namespace fractal_lab {

inline constexpr std::size_t max_generated_points = 1000000;

enum class GeneratorKind { cantor, carpet, grid };
enum class WeightKind { none, unit, uniform, power };

// Text form: base["+"modifier]*, e.g.
//   cantor:8   carpet:5   grid:1000   grid:100:2   grid:1001:1:-1:1
//   grid:1000+snowflake:0.5   grid:1001:1:-1:1+weight:power:1
struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::grid;
  int depth = 0;           // cantor, carpet
  std::size_t n = 0;       // grid points per axis
  std::size_t dim = 1;     // grid
  double lo = 0.0;
  double hi = 1.0;
  std::optional<double> snowflake;  // metric exponent applied last
  WeightKind weight = WeightKind::none;
  double weight_param = 0.0;        // power exponent a
  std::uint64_t seed = 0;           // generators are deterministic; kept for the echo

  std::size_t point_count() const {
    switch (kind) {
      case GeneratorKind::cantor: return std::size_t{2} << depth;
      case GeneratorKind::carpet: {
        std::size_t c = 1;
        for (int i = 0; i < depth; ++i) c *= 8;
        return c;
      }
      case GeneratorKind::grid: {
        double c = std::pow(static_cast<double>(n), static_cast<double>(dim));
        return c > 1e15 ? static_cast<std::size_t>(1e15) : static_cast<std::size_t>(c);
      }
    }
    return 0;
  }

  void validate() const {
    switch (kind) {
      case GeneratorKind::cantor:
        if (depth < 0 || depth > 18) throw InvalidInput("cantor depth must lie in 0..18");
        break;
      case GeneratorKind::carpet:
        if (depth < 0 || depth > 6) throw InvalidInput("carpet depth must lie in 0..6");
        break;
      case GeneratorKind::grid:
        if (n < 2) throw InvalidInput("grid needs at least two points per axis");
        if (dim < 1 || dim > 3) throw InvalidInput("grid dimension must lie in 1..3");
        if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) throw InvalidInput("grid needs finite lo < hi");
        break;
    }
    if (point_count() > max_generated_points)
      throw InvalidInput("generator would produce " + std::to_string(point_count()) + " points (cap " +
                         std::to_string(max_generated_points) + ")");
    if (snowflake && !(*snowflake > 0.0 && *snowflake < 1.0))
      throw InvalidInput("snowflake exponent must lie in (0,1)");
    if (weight == WeightKind::power && !(weight_param > -1.0 && std::isfinite(weight_param)))
      throw InvalidInput("power weight exponent must exceed -1");
  }
};

inline std::string to_string(const GeneratorSpec& s) {
  std::string out;
  switch (s.kind) {
    case GeneratorKind::cantor: out = "cantor:" + std::to_string(s.depth); break;
    case GeneratorKind::carpet: out = "carpet:" + std::to_string(s.depth); break;
    case GeneratorKind::grid:
      out = "grid:" + std::to_string(s.n);
      if (s.dim != 1 || s.lo != 0.0 || s.hi != 1.0) out += ":" + std::to_string(s.dim);
      if (s.lo != 0.0 || s.hi != 1.0) out += ":" + format_real(s.lo) + ":" + format_real(s.hi);
      break;
  }
  switch (s.weight) {
    case WeightKind::none: break;
    case WeightKind::unit: out += "+weight:unit"; break;
    case WeightKind::uniform: out += "+weight:uniform"; break;
    case WeightKind::power: out += "+weight:power:" + format_real(s.weight_param); break;
  }
  if (s.snowflake) out += "+snowflake:" + format_real(*s.snowflake);
  if (s.seed != 0) out += "+seed:" + std::to_string(s.seed);
  return out;
}

inline bool looks_like_generator(const std::string& text) {
  auto head = text.substr(0, text.find(':'));
  return head == "cantor" || head == "carpet" || head == "sierpinski_carpet" || head == "grid";
}

inline GeneratorSpec parse_generator(const std::string& text) {
  std::vector<std::string> parts = split(text, '+');
  std::vector<std::string> base = split(parts[0], ':');
  GeneratorSpec s;
  if (base[0] == "cantor" || base[0] == "carpet" || base[0] == "sierpinski_carpet") {
    s.kind = base[0] == "cantor" ? GeneratorKind::cantor : GeneratorKind::carpet;
    if (base.size() != 2) throw InvalidInput("expected " + base[0] + ":<depth>");
    s.depth = static_cast<int>(parse_integer(base[1], "depth"));
  } else if (base[0] == "grid") {
    s.kind = GeneratorKind::grid;
    if (base.size() != 2 && base.size() != 3 && base.size() != 5)
      throw InvalidInput("expected grid:<n>[:<dim>[:<lo>:<hi>]]");
    long long n = parse_integer(base[1], "grid size");
    if (n < 2) throw InvalidInput("grid needs at least two points per axis");
    s.n = static_cast<std::size_t>(n);
    if (base.size() >= 3) {
      long long d = parse_integer(base[2], "grid dimension");
      if (d < 1) throw InvalidInput("grid dimension must be positive");
      s.dim = static_cast<std::size_t>(d);
    }
    if (base.size() == 5) {
      s.lo = parse_real(base[3], "grid lower end");
      s.hi = parse_real(base[4], "grid upper end");
    }
  } else {
    throw InvalidInput("unknown generator '" + base[0] + "' (expected cantor, carpet or grid)");
  }
  for (std::size_t i = 1; i < parts.size(); ++i) {
    std::vector<std::string> mod = split(parts[i], ':');
    if (mod[0] == "snowflake" && mod.size() == 2) {
      double a = parse_real(mod[1], "snowflake exponent");
      s.snowflake = s.snowflake ? *s.snowflake * a : a;
    } else if (mod[0] == "weight" && mod.size() >= 2) {
      if (mod[1] == "unit" && mod.size() == 2) {
        s.weight = WeightKind::unit;
      } else if (mod[1] == "uniform" && mod.size() == 2) {
        s.weight = WeightKind::uniform;
      } else if (mod[1] == "power" && mod.size() == 3) {
        s.weight = WeightKind::power;
        s.weight_param = parse_real(mod[2], "power weight exponent");
      } else {
        throw InvalidInput("unknown weight '" + parts[i] + "' (expected unit, uniform or power:<a>)");
      }
    } else if (mod[0] == "seed" && mod.size() == 2) {
      long long seed = parse_integer(mod[1], "seed");
      if (seed < 0) throw InvalidInput("seed must be nonnegative");
      s.seed = static_cast<std::uint64_t>(seed);
    } else {
      throw InvalidInput("unknown generator modifier '" + parts[i] + "'");
    }
  }
  s.validate();
  return s;
}

namespace detail {

inline std::vector<double> cantor_points(int depth) {
  // Left ends of the depth-k intervals in units of 3^-k.
  std::vector<std::uint64_t> lefts{0};
  std::uint64_t unit = 1;
  for (int i = 0; i < depth; ++i) unit *= 3;
  std::uint64_t len = unit;
  for (int level = 0; level < depth; ++level) {
    len /= 3;
    std::vector<std::uint64_t> next;
    next.reserve(lefts.size() * 2);
    for (std::uint64_t l : lefts) {
      next.push_back(l);
      next.push_back(l + 2 * len);
    }
    lefts = std::move(next);
  }
  std::vector<double> pts;
  pts.reserve(lefts.size() * 2);
  double scale = static_cast<double>(unit);
  for (std::uint64_t l : lefts) {
    pts.push_back(static_cast<double>(l) / scale);
    pts.push_back(static_cast<double>(l + len) / scale);
  }
  return pts;
}

inline std::vector<double> carpet_points(int depth) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> cells{{0, 0}};
  for (int level = 0; level < depth; ++level) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> next;
    next.reserve(cells.size() * 8);
    for (auto [i, j] : cells)
      for (std::uint64_t a = 0; a < 3; ++a)
        for (std::uint64_t b = 0; b < 3; ++b)
          if (!(a == 1 && b == 1)) next.emplace_back(3 * i + a, 3 * j + b);
    cells = std::move(next);
  }
  double side = std::pow(3.0, depth);
  std::vector<double> pts;
  pts.reserve(cells.size() * 2);
  for (auto [i, j] : cells) {
    pts.push_back((2.0 * static_cast<double>(i) + 1.0) / (2.0 * side));
    pts.push_back((2.0 * static_cast<double>(j) + 1.0) / (2.0 * side));
  }
  return pts;
}

inline std::vector<double> grid_points(std::size_t n, std::size_t dim, double lo, double hi) {
  std::size_t total = 1;
  for (std::size_t d = 0; d < dim; ++d) total *= n;
  std::vector<double> axis(n);
  for (std::size_t i = 0; i < n; ++i)
    axis[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  std::vector<double> pts(total * dim);
  for (std::size_t p = 0; p < total; ++p) {
    std::size_t rest = p;
    for (std::size_t d = dim; d-- > 0;) {
      pts[p * dim + d] = axis[rest % n];
      rest /= n;
    }
  }
  return pts;
}

// Cell mass of each sample point: grid cells are halved at the boundary;
// cantor and carpet carry the natural self-similar mass.
inline std::vector<double> uniform_mass(const GeneratorSpec& s, std::size_t count) {
  if (s.kind == GeneratorKind::cantor || s.kind == GeneratorKind::carpet)
    return std::vector<double>(count, 1.0 / static_cast<double>(count));
  double h = (s.hi - s.lo) / static_cast<double>(s.n - 1);
  std::vector<double> mass(count, 1.0);
  for (std::size_t p = 0; p < count; ++p) {
    std::size_t rest = p;
    for (std::size_t d = 0; d < s.dim; ++d) {
      std::size_t i = rest % s.n;
      rest /= s.n;
      mass[p] *= (i == 0 || i == s.n - 1) ? h / 2.0 : h;
    }
  }
  return mass;
}

}  // namespace detail

inline SpaceSample generate(const GeneratorSpec& spec) {
  spec.validate();
  std::vector<double> coords;
  std::size_t dim = 1;
  switch (spec.kind) {
    case GeneratorKind::cantor: coords = detail::cantor_points(spec.depth); break;
    case GeneratorKind::carpet:
      coords = detail::carpet_points(spec.depth);
      dim = 2;
      break;
    case GeneratorKind::grid:
      coords = detail::grid_points(spec.n, spec.dim, spec.lo, spec.hi);
      dim = spec.dim;
      break;
  }
  SpaceSample space = SpaceSample::euclidean(std::move(coords), dim, to_string(spec));
  std::size_t n = space.size();
  if (spec.weight == WeightKind::unit) {
    space = space.with_weights(std::vector<double>(n, 1.0));
  } else if (spec.weight == WeightKind::uniform) {
    space = space.with_weights(detail::uniform_mass(spec, n));
  } else if (spec.weight == WeightKind::power) {
    std::vector<double> w = detail::uniform_mass(spec, n);
    for (PointId p = 0; p < n; ++p) {
      auto x = space.coordinates(p);
      double norm = 0.0;
      for (double c : x) norm += c * c;
      double f = std::pow(std::sqrt(norm), spec.weight_param);
      if (!std::isfinite(f))
        throw InvalidInput("power weight |x|^" + format_real(spec.weight_param) + " is not finite at point " +
                           std::to_string(p));
      w[p] *= f;
    }
    space = space.with_weights(std::move(w));
  }
  if (spec.snowflake) space = space.snowflake(*spec.snowflake);
  return space;
}

inline SpaceSample generate(const std::string& text) { return generate(parse_generator(text)); }

enum class MapKind { identity, snowflake_id, power, radial, affine };

// Text form: identity | snowflake_id:<alpha> | power:<beta> | radial:<beta> | affine:<a>:<b>
struct MapSpec {
  MapKind kind = MapKind::identity;
  double a = 0.0;  // alpha, beta, or affine slope
  double b = 0.0;  // affine offset

  void validate() const {
    switch (kind) {
      case MapKind::identity: break;
      case MapKind::snowflake_id:
        if (!(a > 0.0 && a < 1.0)) throw InvalidInput("snowflake_id exponent must lie in (0,1)");
        break;
      case MapKind::power:
      case MapKind::radial:
        if (!(a > 0.0 && a <= 1.0)) throw InvalidInput("power exponent beta must lie in (0,1]");
        break;
      case MapKind::affine:
        if (!std::isfinite(a) || !std::isfinite(b)) throw InvalidInput("affine coefficients must be finite");
        break;
    }
  }
};

inline std::string to_string(const MapSpec& m) {
  switch (m.kind) {
    case MapKind::identity: return "identity";
    case MapKind::snowflake_id: return "snowflake_id:" + format_real(m.a);
    case MapKind::power: return "power:" + format_real(m.a);
    case MapKind::radial: return "radial:" + format_real(m.a);
    case MapKind::affine: return "affine:" + format_real(m.a) + ":" + format_real(m.b);
  }
  return "?";
}

inline MapSpec parse_map(const std::string& text) {
  std::vector<std::string> f = split(text, ':');
  MapSpec m;
  if (f[0] == "identity" && f.size() == 1) {
    m.kind = MapKind::identity;
  } else if ((f[0] == "snowflake_id" || f[0] == "power" || f[0] == "radial") && f.size() == 2) {
    m.kind = f[0] == "snowflake_id" ? MapKind::snowflake_id : f[0] == "power" ? MapKind::power : MapKind::radial;
    m.a = parse_real(f[1], f[0] + " exponent");
  } else if (f[0] == "affine" && f.size() == 3) {
    m.kind = MapKind::affine;
    m.a = parse_real(f[1], "affine slope");
    m.b = parse_real(f[2], "affine offset");
  } else {
    throw InvalidInput("unknown map '" + text +
                       "' (expected identity, snowflake_id:<a>, power:<b>, radial:<b> or affine:<a>:<b>)");
  }
  m.validate();
  return m;
}

namespace detail {

// Image sample of coordinate-wise mapped points; coincident images merge.
inline SampledMap coordinate_map(const SpaceSample& source, std::vector<double> image, std::string label) {
  std::size_t n = source.size(), dim = source.dim();
  for (double v : image)
    if (!std::isfinite(v)) throw InvalidInput("map produced a non-finite image coordinate");
  std::vector<PointId> order(n);
  std::iota(order.begin(), order.end(), PointId{0});
  auto row = [&](PointId p) { return image.begin() + static_cast<std::ptrdiff_t>(p * dim); };
  auto end = [&](PointId p) { return row(p) + static_cast<std::ptrdiff_t>(dim); };
  std::stable_sort(order.begin(), order.end(),
                   [&](PointId a, PointId b) { return std::lexicographical_compare(row(a), end(a), row(b), end(b)); });
  // Target ids follow first appearance in source order.
  std::vector<PointId> rep(n);
  for (std::size_t i = 0; i < n; ++i) {
    bool same = i > 0 && std::equal(row(order[i - 1]), end(order[i - 1]), row(order[i]));
    rep[order[i]] = same ? rep[order[i - 1]] : order[i];
  }
  std::vector<PointId> assignment(n);
  std::vector<PointId> target_id(n, n);
  std::vector<double> coords;
  std::size_t next = 0;
  for (PointId p = 0; p < n; ++p) {
    PointId r = rep[p];
    if (target_id[r] == n) {
      target_id[r] = next++;
      coords.insert(coords.end(), row(r), end(r));
    }
    assignment[p] = target_id[r];
  }
  SpaceSample target = SpaceSample::euclidean(std::move(coords), dim, label);
  return SampledMap(source, std::move(target), std::move(assignment), std::move(label));
}

}  // namespace detail

inline SampledMap make_map(const MapSpec& spec, const SpaceSample& source) {
  spec.validate();
  std::string label = to_string(spec);
  std::vector<PointId> ident(source.size());
  std::iota(ident.begin(), ident.end(), PointId{0});
  if (spec.kind == MapKind::identity) return SampledMap(source, source, std::move(ident), label);
  if (spec.kind == MapKind::snowflake_id)
    return SampledMap(source, source.snowflake(spec.a).without_weights(), std::move(ident), label);
  if (!source.has_coordinates()) throw InvalidInput("map '" + label + "' needs a coordinate sample");
  std::size_t n = source.size(), dim = source.dim();
  std::vector<double> image(source.all_coordinates().begin(), source.all_coordinates().end());
  switch (spec.kind) {
    case MapKind::power:
      for (std::size_t i = 0; i < image.size(); ++i) {
        if (image[i] < 0.0)
          throw InvalidInput("power map needs nonnegative coordinates (point " + std::to_string(i / dim) + ")");
        image[i] = std::pow(image[i], spec.a);
      }
      break;
    case MapKind::radial:
      for (std::size_t p = 0; p < n; ++p) {
        double norm = 0.0;
        for (std::size_t d = 0; d < dim; ++d) norm += image[p * dim + d] * image[p * dim + d];
        norm = std::sqrt(norm);
        double s = norm > 0.0 ? std::pow(norm, spec.a - 1.0) : 0.0;
        for (std::size_t d = 0; d < dim; ++d) image[p * dim + d] *= s;
      }
      break;
    case MapKind::affine:
      for (double& v : image) v = spec.a * v + spec.b;
      break;
    default: break;
  }
  return detail::coordinate_map(source, std::move(image), label);
}

inline SampledMap make_map(const std::string& text, const SpaceSample& source) {
  return make_map(parse_map(text), source);
}

}  // namespace fractal_lab
