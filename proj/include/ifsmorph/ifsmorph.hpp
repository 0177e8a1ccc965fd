#pragma once

#include "ifsmorph/error.hpp"
#include "ifsmorph/exact.hpp"
#include "ifsmorph/random.hpp"
#include "ifsmorph/cloud.hpp"
#include "ifsmorph/ifs.hpp"
#include "ifsmorph/morphism.hpp"
#include "ifsmorph/fibred.hpp"
#include "ifsmorph/search.hpp"
#include "ifsmorph/io.hpp"
