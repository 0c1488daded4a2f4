#pragma once

#include "topos_forge/error.hpp"
#include "topos_forge/category.hpp"
#include "topos_forge/presheaf.hpp"
#include "topos_forge/natural_search.hpp"
#include "topos_forge/limits.hpp"
#include "topos_forge/colimits.hpp"
#include "topos_forge/factorization.hpp"
#include "topos_forge/subobject.hpp"
#include "topos_forge/omega.hpp"
#include "topos_forge/signature.hpp"
#include "topos_forge/structure.hpp"
#include "topos_forge/formula.hpp"
#include "topos_forge/parser.hpp"
#include "topos_forge/semantics.hpp"
#include "topos_forge/kripke_joyal.hpp"
#include "topos_forge/filter.hpp"
#include "topos_forge/filtered_product.hpp"
#include "topos_forge/los.hpp"
