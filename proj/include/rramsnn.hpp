#pragma once

#include "rramsnn/config.hpp"
#include "rramsnn/crossbar.hpp"
#include "rramsnn/csv.hpp"
#include "rramsnn/dataset.hpp"
#include "rramsnn/device.hpp"
#include "rramsnn/encoding.hpp"
#include "rramsnn/harness.hpp"
#include "rramsnn/network.hpp"
#include "rramsnn/rng.hpp"
#include "rramsnn/stats.hpp"
#include "rramsnn/stdp.hpp"
#include "rramsnn/synapse.hpp"
