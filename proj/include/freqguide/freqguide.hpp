// Copyright (C) 2026 The freqguide Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "freqguide/analytic_models.hpp"
#include "freqguide/config.hpp"
#include "freqguide/diffusion.hpp"
#include "freqguide/error.hpp"
#include "freqguide/frequency.hpp"
#include "freqguide/guidance.hpp"
#include "freqguide/io.hpp"
#include "freqguide/metrics.hpp"
#include "freqguide/random.hpp"
#include "freqguide/tensor.hpp"
