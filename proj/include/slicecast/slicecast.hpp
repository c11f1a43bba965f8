#pragma once

#include "error.hpp"
#include "format.hpp"
#include "ingest.hpp"
#include "metrics.hpp"
#include "difficulty.hpp"
#include "linalg.hpp"
#include "trendfit.hpp"
#include "stats.hpp"
#include "synth.hpp"
#include "report.hpp"
#include "svg.hpp"
#include "commands.hpp"
