#pragma once

#include "lagcn/checkpoint.hpp"
#include "lagcn/edge_classifier.hpp"
#include "lagcn/error.hpp"
#include "lagcn/graph.hpp"
#include "lagcn/graph_io.hpp"
#include "lagcn/matrix.hpp"
#include "lagcn/models.hpp"
#include "lagcn/propagation.hpp"
#include "lagcn/random.hpp"
#include "lagcn/refinement.hpp"
#include "lagcn/theory.hpp"
