#pragma once

#include "ettkit/ett/compute.hpp"
#include "ettkit/ett/ett_json.hpp"
#include "ettkit/ett/validate.hpp"
