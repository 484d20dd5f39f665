#pragma once

#include "modesheaf/barycentric.hpp"
#include "modesheaf/complex.hpp"
#include "modesheaf/core.hpp"
#include "modesheaf/cover.hpp"
#include "modesheaf/engine.hpp"
#include "modesheaf/environment.hpp"
#include "modesheaf/laws.hpp"
#include "modesheaf/mode_system.hpp"
#include "modesheaf/partition.hpp"
#include "modesheaf/scenario.hpp"
