#pragma once

#include "citetail/error.hpp"
#include "citetail/format.hpp"
#include "citetail/model.hpp"
#include "citetail/ranking.hpp"
#include "citetail/indicators.hpp"
#include "citetail/tailfit.hpp"
#include "citetail/rng.hpp"
#include "citetail/mixture.hpp"
#include "citetail/ingest.hpp"
