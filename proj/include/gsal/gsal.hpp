#pragma once

#include "gsal/bench.hpp"
#include "gsal/color.hpp"
#include "gsal/config.hpp"
#include "gsal/convolution.hpp"
#include "gsal/error.hpp"
#include "gsal/fixation_engine.hpp"
#include "gsal/foveation.hpp"
#include "gsal/gamma_kernel.hpp"
#include "gsal/grid.hpp"
#include "gsal/image_io.hpp"
#include "gsal/manifest.hpp"
#include "gsal/metrics.hpp"
#include "gsal/records.hpp"
#include "gsal/render.hpp"
#include "gsal/saliency.hpp"
#include "gsal/tensor_io.hpp"
#include "gsal/topdown.hpp"
