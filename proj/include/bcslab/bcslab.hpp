#pragma once

#include "bcslab/app.hpp"
#include "bcslab/config.hpp"
#include "bcslab/critical.hpp"
#include "bcslab/criterion.hpp"
#include "bcslab/error.hpp"
#include "bcslab/gap.hpp"
#include "bcslab/grid.hpp"
#include "bcslab/io.hpp"
#include "bcslab/operator.hpp"
#include "bcslab/potential.hpp"
#include "bcslab/quadrature.hpp"
#include "bcslab/sector_kernel.hpp"
#include "bcslab/symbols.hpp"
