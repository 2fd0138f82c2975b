#pragma once

#include "greywater/calib.hpp"
#include "greywater/control.hpp"
#include "greywater/error.hpp"
#include "greywater/hydro.hpp"
#include "greywater/io.hpp"
#include "greywater/scenario.hpp"
#include "greywater/sensemodel.hpp"
#include "greywater/substances.hpp"
