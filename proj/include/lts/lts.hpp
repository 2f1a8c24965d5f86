#pragma once

#include "lts/common.hpp"
#include "lts/criticality.hpp"
#include "lts/disjoint_set.hpp"
#include "lts/io.hpp"
#include "lts/lts_engine.hpp"
#include "lts/mergeable_heap.hpp"
#include "lts/order_field.hpp"
#include "lts/persistence.hpp"
#include "lts/triangulation.hpp"
