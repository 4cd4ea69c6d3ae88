#pragma once

#include "fda/basis.hpp"
#include "fda/clustering.hpp"
#include "fda/error.hpp"
#include "fda/fpca.hpp"
#include "fda/moments.hpp"
#include "fda/regression.hpp"
#include "fda/scan.hpp"
#include "fda/simulate.hpp"
#include "fda/smoothing.hpp"
