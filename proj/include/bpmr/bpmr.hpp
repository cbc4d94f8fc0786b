#pragma once

// Behavior-pattern multi-behavior recommender: walk-count features over
// per-behavior interaction matrices, naive Bayes log-odds ranking, and the
// leave-one-out evaluation harness.

#include "bpmr/bayes.hpp"
#include "bpmr/dataset.hpp"
#include "bpmr/error.hpp"
#include "bpmr/evaluation.hpp"
#include "bpmr/experiment.hpp"
#include "bpmr/metrics.hpp"
#include "bpmr/model_io.hpp"
#include "bpmr/parallel.hpp"
#include "bpmr/pattern.hpp"
#include "bpmr/report_io.hpp"
#include "bpmr/statistics.hpp"
#include "bpmr/walk_count.hpp"
#include "bpmr/walk_oracle.hpp"
