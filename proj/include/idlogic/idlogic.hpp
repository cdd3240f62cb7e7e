#pragma once

#include "idlogic/ast.hpp"
#include "idlogic/completion.hpp"
#include "idlogic/engine/solver.hpp"
#include "idlogic/fd/model.hpp"
#include "idlogic/fd/search.hpp"
#include "idlogic/oracle.hpp"
#include "idlogic/parser.hpp"
