#pragma once

#include "priorkrylov/core/types.hpp"
#include "priorkrylov/core/linear_operator.hpp"
#include "priorkrylov/core/dense.hpp"
#include "priorkrylov/core/rng.hpp"
#include "priorkrylov/transforms/sparsifying.hpp"
#include "priorkrylov/transforms/dct.hpp"
#include "priorkrylov/priorcond/pinv.hpp"
#include "priorkrylov/priorcond/oblique.hpp"
#include "priorkrylov/weights/weights.hpp"
#include "priorkrylov/regparam/discrepancy.hpp"
#include "priorkrylov/solvers/types.hpp"
#include "priorkrylov/solvers/basis.hpp"
#include "priorkrylov/solvers/sgks.hpp"
#include "priorkrylov/solvers/psgks.hpp"
#include "priorkrylov/solvers/psgkb.hpp"
#include "priorkrylov/solvers/fgk.hpp"
#include "priorkrylov/metrics/metrics.hpp"
#include "priorkrylov/problems/problems.hpp"
#include "priorkrylov/analysis/spectra.hpp"
