#pragma once

#include "avqoe/cross_validation.hpp"
#include "avqoe/dataset.hpp"
#include "avqoe/domain.hpp"
#include "avqoe/forest.hpp"
#include "avqoe/metrics.hpp"
#include "avqoe/mlp.hpp"
#include "avqoe/model_io.hpp"
#include "avqoe/report_io.hpp"
#include "avqoe/synth.hpp"

namespace avqoe {
inline constexpr std::string_view kVersion = "0.1.0";
}
