#pragma once

#include "ettkit/neural/siren.hpp"
#include "ettkit/neural/siren_json.hpp"
