#pragma once
// Umbrella header.

#include "falsikit/errors.hpp"
#include "falsikit/random.hpp"
#include "falsikit/parallel.hpp"
#include "falsikit/gaussian.hpp"
#include "falsikit/ensemble.hpp"
#include "falsikit/series.hpp"
#include "falsikit/hysteresis.hpp"
#include "falsikit/simulate.hpp"
#include "falsikit/modal.hpp"
#include "falsikit/shear_building.hpp"
#include "falsikit/tmd_frame.hpp"
#include "falsikit/biaxial_isolation.hpp"
#include "falsikit/excitation.hpp"
#include "falsikit/falsification.hpp"
#include "falsikit/prediction.hpp"
#include "falsikit/timeseries_io.hpp"
#include "falsikit/bindings.hpp"
#include "falsikit/config.hpp"
#include "falsikit/pipeline.hpp"
