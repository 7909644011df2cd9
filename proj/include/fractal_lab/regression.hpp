#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>

#include "fractal_lab/error.hpp"

namespace fractal_lab {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // max |y - fit(x)|
};

// Ordinary least squares, summed in index order.
inline LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidInput("regression inputs differ in length");
  if (x.size() < 2) throw InvalidInput("regression needs at least two points");
  double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidInput("regression abscissae are all equal");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i)
    fit.residual = std::max(fit.residual, std::abs(y[i] - (fit.intercept + fit.slope * x[i])));
  return fit;
}

}  // namespace fractal_lab
