// Copyright 2026 The mcal-audit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "mcal/acceptance.hpp"
#include "mcal/budget.hpp"
#include "mcal/core.hpp"
#include "mcal/distances.hpp"
#include "mcal/enumerate.hpp"
#include "mcal/errors.hpp"
#include "mcal/estimators.hpp"
#include "mcal/instances.hpp"
#include "mcal/io.hpp"
#include "mcal/lp.hpp"
#include "mcal/multiaccuracy.hpp"
#include "mcal/partitions.hpp"
#include "mcal/random.hpp"
#include "mcal/rational.hpp"
