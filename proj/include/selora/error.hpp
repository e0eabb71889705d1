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

#ifndef SELORA_ERROR_HPP
#define SELORA_ERROR_HPP

#include <stdexcept>
#include <string>

namespace selora {

// Invalid parameters or configuration (bad sf, k, prefix, config file keys ...)
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Symbol value outside [0, m-1]
struct SymbolError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

// Sample count does not match what the operation requires
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Window / interferer index out of range
struct IndexError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

// Coherent detection with h == 0
struct DegenerateChannelError : std::domain_error {
    using std::domain_error::domain_error;
};

// Exhaustive joint ML search exceeds the candidate cap
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// SER records do not bracket the requested target
struct InsufficientSweepError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Output file could not be written
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace selora

#endif
