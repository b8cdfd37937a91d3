#pragma once

#include "errors.hpp"
#include "multi_index.hpp"
#include "frequency.hpp"
#include "series.hpp"
#include "normal_series.hpp"
#include "graded.hpp"
#include "exp_poly.hpp"
#include "dense.hpp"
#include "flow.hpp"
#include "birkhoff.hpp"
#include "asymptotic.hpp"
#include "majorant.hpp"
#include "io.hpp"
