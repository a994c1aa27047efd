#pragma once

#include "adqec/channels.hpp"
#include "adqec/codes.hpp"
#include "adqec/experiments.hpp"
#include "adqec/fidelity.hpp"
#include "adqec/matrix.hpp"
#include "adqec/optimizer.hpp"
#include "adqec/qec_criteria.hpp"
#include "adqec/recovery.hpp"
#include "adqec/serialization.hpp"
