/*
 * Copyright 2026 The mvr Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "mvr/compress.hpp"
#include "mvr/core.hpp"
#include "mvr/error.hpp"
#include "mvr/eval.hpp"
#include "mvr/half.hpp"
#include "mvr/index.hpp"
#include "mvr/interpret.hpp"
#include "mvr/lexical.hpp"
#include "mvr/loss.hpp"
#include "mvr/random.hpp"
#include "mvr/synth.hpp"
