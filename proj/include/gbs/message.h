// Copyright 2026 The GBS Harness Authors.
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

#ifndef GBS_MESSAGE_H_
#define GBS_MESSAGE_H_

#include <string>
#include <string_view>
#include <vector>

namespace gbs {

enum class Role { kSystem, kUser, kAssistant };

std::string_view RoleName(Role role);  // "system", "user", "assistant"
Role ParseRole(std::string_view name);

struct Message {
  Role role = Role::kUser;
  std::string content;

  bool operator==(const Message&) const = default;
};

using MessageList = std::vector<Message>;

}  // namespace gbs

#endif  // GBS_MESSAGE_H_
