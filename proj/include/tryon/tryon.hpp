#pragma once

#include "tryon/displacement.hpp"
#include "tryon/error.hpp"
#include "tryon/eyewear_fit.hpp"
#include "tryon/fitting.hpp"
#include "tryon/geom.hpp"
#include "tryon/hash.hpp"
#include "tryon/head_model.hpp"
#include "tryon/mesh.hpp"
#include "tryon/mesh_io.hpp"
#include "tryon/metrics.hpp"
#include "tryon/pipeline.hpp"
#include "tryon/png_io.hpp"
#include "tryon/surface_query.hpp"
