#pragma once

#include "robl1/bounds.hpp"
#include "robl1/certificates.hpp"
#include "robl1/datamodel.hpp"
#include "robl1/errors.hpp"
#include "robl1/experiments.hpp"
#include "robl1/io.hpp"
#include "robl1/lad.hpp"
#include "robl1/linalg.hpp"
#include "robl1/rng.hpp"
#include "robl1/serialize.hpp"
#include "robl1/solvers.hpp"
