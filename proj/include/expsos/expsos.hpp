#pragma once

#include "expsos/apps.hpp"
#include "expsos/arith.hpp"
#include "expsos/attacks.hpp"
#include "expsos/bench.hpp"
#include "expsos/blind.hpp"
#include "expsos/cloud.hpp"
#include "expsos/curve.hpp"
#include "expsos/ecsm_sos.hpp"
#include "expsos/modexp_sos.hpp"
#include "expsos/net.hpp"
