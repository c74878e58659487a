// Copyright 2026 The qmapf Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "qmapf/grid_world.hpp"
#include "qmapf/qubo_model.hpp"
#include "qmapf/penalty_builder.hpp"
#include "qmapf/preprocessor.hpp"
#include "qmapf/solvers.hpp"
#include "qmapf/post_processor.hpp"
#include "qmapf/window_planner.hpp"
#include "qmapf/multi_agent.hpp"
#include "qmapf/classical_baseline.hpp"
#include "qmapf/scenario.hpp"
#include "qmapf/report.hpp"
#include "qmapf/svg.hpp"
#include "qmapf/benchmark.hpp"
