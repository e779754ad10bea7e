#pragma once

#include "core.hpp"
#include "splines.hpp"
#include "geometry.hpp"
#include "lagrange.hpp"
#include "quadrature.hpp"
#include "trimming.hpp"
#include "reparam.hpp"
#include "parallel.hpp"
#include "assembly.hpp"
#include "solver.hpp"
#include "analysis.hpp"
#include "config.hpp"
#include "verify.hpp"
