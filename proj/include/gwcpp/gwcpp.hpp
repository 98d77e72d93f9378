#pragma once

#include "gwcpp/chains.hpp"
#include "gwcpp/checks.hpp"
#include "gwcpp/dist_table.hpp"
#include "gwcpp/environment.hpp"
#include "gwcpp/errors.hpp"
#include "gwcpp/eta_law.hpp"
#include "gwcpp/exact_laws.hpp"
#include "gwcpp/figure1.hpp"
#include "gwcpp/genealogy.hpp"
#include "gwcpp/io.hpp"
#include "gwcpp/offspring_law.hpp"
#include "gwcpp/pgf.hpp"
#include "gwcpp/point_measure.hpp"
#include "gwcpp/random.hpp"
#include "gwcpp/scalar.hpp"
#include "gwcpp/witness.hpp"
