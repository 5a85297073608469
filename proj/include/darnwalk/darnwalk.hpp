// Copyright 2026 The darnwalk Authors.
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


#ifndef DARNWALK_DARNWALK_HPP_
#define DARNWALK_DARNWALK_HPP_

#include "darnwalk/dynamics.hpp"
#include "darnwalk/experiments.hpp"
#include "darnwalk/geometry.hpp"
#include "darnwalk/io.hpp"
#include "darnwalk/isoperimetry.hpp"
#include "darnwalk/lattice.hpp"
#include "darnwalk/parallel.hpp"
#include "darnwalk/rng.hpp"
#include "darnwalk/spectral.hpp"
#include "darnwalk/stats.hpp"

#endif  // DARNWALK_DARNWALK_HPP_
