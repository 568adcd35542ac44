// Copyright 2026 The relsim Authors
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

#include "relsim/error.hpp"

namespace relsim {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::io: return "io";
    case Errc::parse: return "parse";
    case Errc::empty_store: return "empty_store";
    case Errc::config: return "config";
    case Errc::index: return "index";
    case Errc::contract: return "contract";
    case Errc::training: return "training";
    case Errc::degenerate_input: return "degenerate_input";
    case Errc::undefined_estimate: return "undefined_estimate";
    case Errc::refused: return "refused";
    case Errc::input: return "input";
    case Errc::missing_artifact: return "missing_artifact";
  }
  return "unknown";
}

void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace relsim
