#pragma once

#include "celltopo/errors.hpp"
#include "celltopo/random.hpp"
#include "celltopo/predicates.hpp"
#include "celltopo/geometry.hpp"
#include "celltopo/alpha_filtration.hpp"
#include "celltopo/homology.hpp"
#include "celltopo/fractal_analysis.hpp"
#include "celltopo/distribution_fit.hpp"
#include "celltopo/data_io.hpp"
