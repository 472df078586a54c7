#pragma once

#include "anonet/adversary.hpp"
#include "anonet/analysis.hpp"
#include "anonet/causal.hpp"
#include "anonet/digest.hpp"
#include "anonet/engine.hpp"
#include "anonet/error.hpp"
#include "anonet/graph.hpp"
#include "anonet/io.hpp"
#include "anonet/protocols/broadcast_dynamic.hpp"
#include "anonet/protocols/individual_conversations.hpp"
#include "anonet/protocols/one_to_each.hpp"
#include "anonet/protocols/static.hpp"
#include "anonet/registry.hpp"
#include "anonet/rng.hpp"
#include "anonet/value.hpp"
