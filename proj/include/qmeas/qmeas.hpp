// Copyright 2026 The qmeas Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "qmeas/analysis.hpp"
#include "qmeas/error.hpp"
#include "qmeas/inequalities.hpp"
#include "qmeas/instrument.hpp"
#include "qmeas/metrics.hpp"
#include "qmeas/operator.hpp"
#include "qmeas/philox.hpp"
#include "qmeas/quasiprob.hpp"
#include "qmeas/random.hpp"
#include "qmeas/retrodiction.hpp"
#include "qmeas/scenario.hpp"
#include "qmeas/scenario_io.hpp"
