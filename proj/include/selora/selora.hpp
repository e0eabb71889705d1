// SPDX-License-Identifier: Apache-2.0
//
// selora: spectral-efficient LoRa link-level simulation library
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef SELORA_SELORA_HPP
#define SELORA_SELORA_HPP

#include "selora/channel.hpp"
#include "selora/config.hpp"
#include "selora/detection.hpp"
#include "selora/error.hpp"
#include "selora/framing.hpp"
#include "selora/harness.hpp"
#include "selora/waveform.hpp"

#endif
