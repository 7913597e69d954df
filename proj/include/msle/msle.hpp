#pragma once

// Multi-view sparse Laplacian eigenmaps feature selection, umbrella header.

#include "msle/data_io.hpp"
#include "msle/embedding.hpp"
#include "msle/error.hpp"
#include "msle/eval.hpp"
#include "msle/graph.hpp"
#include "msle/multiview.hpp"
#include "msle/parallel.hpp"
#include "msle/run_config.hpp"
#include "msle/sparse.hpp"
#include "msle/spectral.hpp"
#include "msle/timing.hpp"
