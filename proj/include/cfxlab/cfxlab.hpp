#pragma once

// Umbrella header: the whole library.

#include "cfxlab/atlas.hpp"
#include "cfxlab/bits.hpp"
#include "cfxlab/cnf.hpp"
#include "cfxlab/cost.hpp"
#include "cfxlab/experiments.hpp"
#include "cfxlab/explain.hpp"
#include "cfxlab/explain_json.hpp"
#include "cfxlab/gadget_json.hpp"
#include "cfxlab/gadgets.hpp"
#include "cfxlab/generators.hpp"
#include "cfxlab/model_json.hpp"
#include "cfxlab/models.hpp"
#include "cfxlab/rational.hpp"
