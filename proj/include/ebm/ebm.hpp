#pragma once

#include "ebm/error.hpp"
#include "ebm/numeric.hpp"
#include "ebm/polynomial.hpp"
#include "ebm/prony_model.hpp"
#include "ebm/charpoly.hpp"
#include "ebm/rootfinder.hpp"
#include "ebm/spectral_analysis.hpp"
#include "ebm/inverse.hpp"
#include "ebm/presets.hpp"
