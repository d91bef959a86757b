#pragma once

#include "lgs/core/camera.hpp"
#include "lgs/core/image.hpp"
#include "lgs/core/layers.hpp"
#include "lgs/core/parallel.hpp"
#include "lgs/format/gaussian_ply.hpp"
#include "lgs/format/kmeans.hpp"
#include "lgs/format/lspl.hpp"
#include "lgs/format/quantize.hpp"
#include "lgs/io/png.hpp"
#include "lgs/metrics/metrics.hpp"
#include "lgs/render/render.hpp"
#include "lgs/splat/gaussian.hpp"
#include "lgs/splat/rasterizer.hpp"
#include "lgs/training/trainer.hpp"
#include "lgs/volume/dataset.hpp"
#include "lgs/volume/generate.hpp"
#include "lgs/volume/raymarch.hpp"
#include "lgs/volume/scenes.hpp"
