#pragma once

#include "trieig/config.hpp"
#include "trieig/control.hpp"
#include "trieig/ergodic.hpp"
#include "trieig/errors.hpp"
#include "trieig/floquet.hpp"
#include "trieig/grid.hpp"
#include "trieig/hjb.hpp"
#include "trieig/hypotheses.hpp"
#include "trieig/io.hpp"
#include "trieig/linalg.hpp"
#include "trieig/model.hpp"
#include "trieig/perron.hpp"
#include "trieig/simplex.hpp"
#include "trieig/spectral.hpp"
