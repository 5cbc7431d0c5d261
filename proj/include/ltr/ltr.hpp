#pragma once

// Umbrella header: graded explanation-ranking data, scoring model, ranking
// objectives, evaluation metrics, and the policy-optimization demonstrator.

#include "ltr/config.hpp"     // IWYU pragma: export
#include "ltr/corpus.hpp"     // IWYU pragma: export
#include "ltr/dataset_io.hpp" // IWYU pragma: export
#include "ltr/error.hpp"      // IWYU pragma: export
#include "ltr/features.hpp"   // IWYU pragma: export
#include "ltr/format.hpp"     // IWYU pragma: export
#include "ltr/losses.hpp"     // IWYU pragma: export
#include "ltr/metrics.hpp"    // IWYU pragma: export
#include "ltr/model.hpp"      // IWYU pragma: export
#include "ltr/ppo.hpp"        // IWYU pragma: export
#include "ltr/rng.hpp"        // IWYU pragma: export
#include "ltr/text.hpp"       // IWYU pragma: export
#include "ltr/train.hpp"      // IWYU pragma: export
