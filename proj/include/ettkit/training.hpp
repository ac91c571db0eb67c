#pragma once

#include "ettkit/training/adjoint.hpp"
#include "ettkit/training/dataset.hpp"
#include "ettkit/training/train.hpp"
