// Copyright 2026 The ordgrade Authors
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

#ifndef ORDGRADE_ORDGRADE_HPP_
#define ORDGRADE_ORDGRADE_HPP_

#include "ordgrade/numerics.hpp"
#include "ordgrade/rng.hpp"
#include "ordgrade/ordinal.hpp"
#include "ordgrade/losses.hpp"
#include "ordgrade/hbp.hpp"
#include "ordgrade/metrics.hpp"
#include "ordgrade/dataset.hpp"
#include "ordgrade/model.hpp"
#include "ordgrade/config.hpp"
#include "ordgrade/checkpoint.hpp"
#include "ordgrade/report.hpp"
#include "ordgrade/train.hpp"
#include "ordgrade/gradcheck.hpp"
#include "ordgrade/commands.hpp"

#endif  // ORDGRADE_ORDGRADE_HPP_
