#pragma once

// Nonlinear sufficient dimension reduction with RKHS representer coefficients:
// GS-KSIR-I/II and GS-KSAVE estimators, a KSIR baseline, cross-validated
// regularization, simulation benchmarks, and a kernel-ridge prediction path.

#include "gsdr/common.hpp"
#include "gsdr/evaluation.hpp"
#include "gsdr/io.hpp"
#include "gsdr/kernels.hpp"
#include "gsdr/rng.hpp"
#include "gsdr/sdr.hpp"
#include "gsdr/simbench.hpp"
#include "gsdr/smoothing.hpp"
