#pragma once

// Umbrella header for the engine (no HTTP dependency; include
// metaonce/http.hpp for the server bindings).

#include "metaonce/analytics.hpp"
#include "metaonce/bundled_ontology.hpp"
#include "metaonce/engine.hpp"
#include "metaonce/error.hpp"
#include "metaonce/event_log.hpp"
#include "metaonce/merge.hpp"
#include "metaonce/ontology.hpp"
#include "metaonce/rules.hpp"
#include "metaonce/service.hpp"
#include "metaonce/world.hpp"
