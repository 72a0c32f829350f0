// Copyright 2026 The fluxdac Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Umbrella header for the fluxdac library.

#include "fluxdac/calibration.hpp"
#include "fluxdac/cli.hpp"
#include "fluxdac/dac.hpp"
#include "fluxdac/errors.hpp"
#include "fluxdac/fluxonium.hpp"
#include "fluxdac/harness.hpp"
#include "fluxdac/nelder_mead.hpp"
#include "fluxdac/presets.hpp"
#include "fluxdac/record.hpp"
#include "fluxdac/scenario.hpp"
#include "fluxdac/sfq.hpp"
#include "fluxdac/squid.hpp"
#include "fluxdac/tridiagonal.hpp"
#include "fluxdac/units.hpp"
#include "fluxdac/waveform.hpp"
