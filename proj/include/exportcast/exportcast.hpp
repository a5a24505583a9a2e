#pragma once

// Umbrella header.

#include "exportcast/config.hpp"
#include "exportcast/disaggregate.hpp"
#include "exportcast/error.hpp"
#include "exportcast/evaluate.hpp"
#include "exportcast/forecast.hpp"
#include "exportcast/ingest.hpp"
#include "exportcast/io.hpp"
#include "exportcast/metrics.hpp"
#include "exportcast/mlp.hpp"
#include "exportcast/persist.hpp"
#include "exportcast/pipeline.hpp"
#include "exportcast/plot.hpp"
#include "exportcast/preprocess.hpp"
