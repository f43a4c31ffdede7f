#pragma once

#include "circleflow/measure.hpp"
#include "circleflow/circot.hpp"
#include "circleflow/energy.hpp"
#include "circleflow/fourier.hpp"
#include "circleflow/trajectory.hpp"
#include "circleflow/jko.hpp"
#include "circleflow/weak_form.hpp"
#include "circleflow/diagnostics.hpp"
#include "circleflow/spectral.hpp"
#include "circleflow/io.hpp"
#include "circleflow/initial_data.hpp"
#include "circleflow/config.hpp"
#include "circleflow/random.hpp"
