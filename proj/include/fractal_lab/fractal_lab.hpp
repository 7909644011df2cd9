#pragma once

#include "fractal_lab/box_dimension.hpp"
#include "fractal_lab/distortion_bounds.hpp"
#include "fractal_lab/dyadic_cubes.hpp"
#include "fractal_lab/error.hpp"
#include "fractal_lab/example_spaces.hpp"
#include "fractal_lab/holder_analysis.hpp"
#include "fractal_lab/io.hpp"
#include "fractal_lab/metric_core.hpp"
#include "fractal_lab/numeric_text.hpp"
#include "fractal_lab/parallel.hpp"
#include "fractal_lab/regression.hpp"
#include "fractal_lab/space_sample.hpp"
