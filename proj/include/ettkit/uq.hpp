#pragma once

#include "ettkit/uq/distribution.hpp"
#include "ettkit/uq/moments.hpp"
#include "ettkit/uq/report_json.hpp"
#include "ettkit/uq/surrogate.hpp"
