// Copyright 2026 The Cheshire Authors
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

#ifndef CHESHIRE_ERRORS_HPP
#define CHESHIRE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cheshire {

/// Malformed input: non-unitary rotations, unnormalizable states, invalid operators.
class InvalidInput : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

/// The post-selection can never succeed (probability or normalization below 1e-12).
class ZeroPostselection : public std::domain_error {
   public:
    using std::domain_error::domain_error;
};

/// Tr(E_f rho_i) vanishes: weak values are undefined, use the matrix-element path.
class NearOrthogonal : public std::domain_error {
   public:
    using std::domain_error::domain_error;
};

/// A limiting formula has no finite value. Carries the order of growth so callers
/// can report it instead of a huge float.
class DivergentLimit : public std::domain_error {
   public:
    DivergentLimit(const std::string &what, std::string scaling)
        : std::domain_error(what), scaling_(std::move(scaling)) {
    }
    const std::string &scaling() const noexcept {
        return scaling_;
    }

   private:
    std::string scaling_;
};

}  // namespace cheshire

#endif
