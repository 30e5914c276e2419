#pragma once

// Everything except the CLI (which pulls in CLI11 and nlohmann::json).
#include "ppmdl/errors.hpp"
#include "ppmdl/core.hpp"
#include "ppmdl/cycle.hpp"
#include "ppmdl/tree.hpp"
#include "ppmdl/notation.hpp"
#include "ppmdl/codec.hpp"
#include "ppmdl/combine.hpp"
#include "ppmdl/extract.hpp"
#include "ppmdl/clique.hpp"
#include "ppmdl/miner.hpp"
#include "ppmdl/synth.hpp"
