#pragma once

#include "oac/channel_model.hpp"
#include "oac/harness.hpp"
#include "oac/numerics.hpp"
#include "oac/oac_core.hpp"
#include "oac/protocol.hpp"
#include "oac/quantizer.hpp"
#include "oac/random.hpp"
