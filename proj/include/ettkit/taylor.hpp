#pragma once

#include "ettkit/taylor/events.hpp"
#include "ettkit/taylor/integrator.hpp"
#include "ettkit/taylor/jet_engine.hpp"
#include "ettkit/taylor/jet_transport.hpp"
