#pragma once

#include "dwell/errors.hpp"
#include "dwell/sym.hpp"
#include "dwell/mesh.hpp"
#include "dwell/phase.hpp"
#include "dwell/sparse.hpp"
#include "dwell/subproblem.hpp"
#include "dwell/descent.hpp"
#include "dwell/limits.hpp"
#include "dwell/relaxation.hpp"
#include "dwell/young.hpp"
#include "dwell/oracle.hpp"
#include "dwell/config.hpp"
#include "dwell/experiment.hpp"
#include "dwell/io.hpp"
