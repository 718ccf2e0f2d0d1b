// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "stagger/field.hpp"
#include "stagger/grid.hpp"
#include "stagger/solvers.hpp"
#include "stagger/materials.hpp"
#include "stagger/integrator.hpp"
#include "stagger/cfl.hpp"
#include "stagger/oracle.hpp"
#include "stagger/config.hpp"
#include "stagger/output.hpp"
#include "stagger/driver.hpp"
#include "stagger/acceptance.hpp"
