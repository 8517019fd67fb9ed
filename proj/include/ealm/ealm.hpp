// Copyright 2026 The EALM Authors
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

#ifndef EALM_EALM_HPP
#define EALM_EALM_HPP

#include "ealm/bench.hpp"
#include "ealm/error.hpp"
#include "ealm/grid.hpp"
#include "ealm/ids_cog.hpp"
#include "ealm/io.hpp"
#include "ealm/modeling.hpp"
#include "ealm/morphology.hpp"
#include "ealm/persistence.hpp"
#include "ealm/rng.hpp"

#endif  // EALM_EALM_HPP
