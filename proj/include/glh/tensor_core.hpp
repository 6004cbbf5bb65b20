#pragma once

#include "contract.hpp"
#include "error.hpp"
#include "field.hpp"
#include "finite_difference.hpp"
#include "grid.hpp"
#include "metric.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
