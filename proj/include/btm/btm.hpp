#pragma once

#include "btm/cooccur.hpp"
#include "btm/error.hpp"
#include "btm/interchange.hpp"
#include "btm/matcher.hpp"
#include "btm/measures.hpp"
#include "btm/oracle.hpp"
#include "btm/pipeline.hpp"
#include "btm/report.hpp"
#include "btm/synth.hpp"
#include "btm/validate.hpp"
#include "btm/version.hpp"
