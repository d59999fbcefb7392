#pragma once

// Memory buoyancy: time-decaying relevance over a multi-user semantic graph.

#include "mb/activity_clock.hpp"
#include "mb/buoyancy.hpp"
#include "mb/engine.hpp"
#include "mb/error.hpp"
#include "mb/event.hpp"
#include "mb/generators.hpp"
#include "mb/graph.hpp"
#include "mb/graph_json.hpp"
#include "mb/harness.hpp"
#include "mb/params.hpp"
#include "mb/query.hpp"
#include "mb/scenario_json.hpp"
#include "mb/state_json.hpp"
#include "mb/time.hpp"
