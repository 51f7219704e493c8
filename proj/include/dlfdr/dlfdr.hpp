#ifndef DLFDR_DLFDR_HPP
#define DLFDR_DLFDR_HPP

// Everything except io.hpp, which pulls in the JSON library.

#include "cutoff_select.hpp"
#include "em_fit.hpp"
#include "error.hpp"
#include "histogram.hpp"
#include "lfdr.hpp"
#include "null_models.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "screening.hpp"
#include "sim_bench.hpp"

#endif // DLFDR_DLFDR_HPP
