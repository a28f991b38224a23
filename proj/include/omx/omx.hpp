// Copyright 2026 The omx Authors
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

#ifndef OMX_OMX_HPP
#define OMX_OMX_HPP

#include "omx/dsl.hpp"
#include "omx/element_op.hpp"
#include "omx/elements.hpp"
#include "omx/error.hpp"
#include "omx/fock.hpp"
#include "omx/measurement.hpp"
#include "omx/protocols.hpp"
#include "omx/registry.hpp"
#include "omx/state.hpp"
#include "omx/tolerances.hpp"

#endif  // OMX_OMX_HPP
