#pragma once

// Umbrella header for the prbp codec library.

#include "prbp/common.hpp"
#include "prbp/plane.hpp"
#include "prbp/cube_io.hpp"
#include "prbp/regress.hpp"
#include "prbp/transform.hpp"
#include "prbp/bitstream.hpp"
#include "prbp/predictors.hpp"
#include "prbp/metrics.hpp"
#include "prbp/codec.hpp"
