#pragma once

#include "fmw/error.hpp"
#include "fmw/signature.hpp"
#include "fmw/formula.hpp"
#include "fmw/structure.hpp"
#include "fmw/parser.hpp"
#include "fmw/filter.hpp"
#include "fmw/product.hpp"
#include "fmw/morphism.hpp"
#include "fmw/constructions.hpp"
#include "fmw/diagram_method.hpp"
#include "fmw/enumerate.hpp"
#include "fmw/los.hpp"
#include "fmw/witness.hpp"
#include "fmw/random.hpp"
#include "fmw/verify.hpp"
