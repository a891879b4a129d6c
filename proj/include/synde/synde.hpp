#pragma once

#include "synde/channelsim.hpp"
#include "synde/code_config.hpp"
#include "synde/codebook.hpp"
#include "synde/decoder.hpp"
#include "synde/gf2.hpp"
#include "synde/harness.hpp"
#include "synde/matrix.hpp"
#include "synde/oracle.hpp"
#include "synde/primerseek.hpp"
#include "synde/trellis.hpp"
