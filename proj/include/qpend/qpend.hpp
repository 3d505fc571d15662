// Copyright (c) 2026 the qpend authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "qpend/core.hpp"
#include "qpend/csv.hpp"
#include "qpend/dynamics.hpp"
#include "qpend/mathieu.hpp"
#include "qpend/numerics.hpp"
#include "qpend/perturbation.hpp"
#include "qpend/revival.hpp"
