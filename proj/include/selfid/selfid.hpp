#pragma once

#include "selfid/belief.hpp"
#include "selfid/config.hpp"
#include "selfid/continuum.hpp"
#include "selfid/io.hpp"
#include "selfid/linalg.hpp"
#include "selfid/pipeline.hpp"
#include "selfid/random.hpp"
#include "selfid/recognition.hpp"
#include "selfid/spaces.hpp"
#include "selfid/synthdata.hpp"
#include "selfid/textmetrics.hpp"
#include "selfid/trainer.hpp"
