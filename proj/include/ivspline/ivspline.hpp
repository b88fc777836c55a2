#pragma once

#include "ivspline/datamodel.hpp"
#include "ivspline/errors.hpp"
#include "ivspline/kernel.hpp"
#include "ivspline/monotone.hpp"
#include "ivspline/selection.hpp"
#include "ivspline/simlab.hpp"
#include "ivspline/solver.hpp"
#include "ivspline/spline.hpp"
#include "ivspline/version.hpp"
