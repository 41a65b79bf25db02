#pragma once

#include "sonosim/beamsim.hpp"
#include "sonosim/datagen.hpp"
#include "sonosim/error.hpp"
#include "sonosim/image.hpp"
#include "sonosim/imgops.hpp"
#include "sonosim/manifest.hpp"
#include "sonosim/phantom.hpp"
#include "sonosim/random.hpp"
