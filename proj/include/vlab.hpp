// Copyright 2026 The vlab Authors.
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

// Umbrella header.

#pragma once

#include "vlab/atoms.hpp"
#include "vlab/bound_report.hpp"
#include "vlab/cz.hpp"
#include "vlab/harness.hpp"
#include "vlab/kernel_bounds.hpp"
#include "vlab/kernels.hpp"
#include "vlab/matrix_core.hpp"
#include "vlab/nc_factor.hpp"
#include "vlab/operator_field.hpp"
#include "vlab/radix.hpp"
#include "vlab/random.hpp"
#include "vlab/serialize.hpp"
#include "vlab/sunouchi.hpp"
#include "vlab/transference.hpp"
#include "vlab/vector_norms.hpp"
#include "vlab/vilenkin.hpp"
