#pragma once

#include "ferro/basis.hpp"
#include "ferro/cli.hpp"
#include "ferro/config.hpp"
#include "ferro/eigensolve.hpp"
#include "ferro/errors.hpp"
#include "ferro/graph.hpp"
#include "ferro/operators.hpp"
#include "ferro/report_io.hpp"
#include "ferro/rng.hpp"
#include "ferro/verify.hpp"
#include "ferro/version.hpp"
