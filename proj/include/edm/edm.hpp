#pragma once

#include "edm/cost_model.hpp"
#include "edm/data_io.hpp"
#include "edm/collection.hpp"
#include "edm/triggers/trigger.hpp"
#include "edm/early_classifier.hpp"
#include "edm/eval.hpp"
