// Copyright 2026 The cfx Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "cfx/encoding.hpp"

namespace cfx {

// Partition of encoded columns into those the generator may change and those
// copied verbatim from the input (every column of an immutable feature).
class MutableMask {
 public:
  MutableMask() = default;

  static MutableMask FromEncoding(const EncodingState& state) {
    MutableMask m;
    m.width_ = state.width();
    m.position_.assign(state.width(), kNone);
    for (const auto& f : state.features()) {
      for (std::size_t k = 0; k < f.width; ++k) {
        const std::size_t col = f.offset + k;
        if (f.immutable) {
          m.immutable_.push_back(col);
        } else {
          m.position_[col] = m.mutable_.size();
          m.mutable_.push_back(col);
        }
      }
    }
    return m;
  }

  std::size_t width() const { return width_; }
  const std::vector<std::size_t>& mutable_columns() const { return mutable_; }
  const std::vector<std::size_t>& immutable_columns() const { return immutable_; }
  std::size_t mutable_width() const { return mutable_.size(); }

  // Index of an encoded column inside the mutable sub-vector.
  std::optional<std::size_t> MutablePosition(std::size_t col) const {
    if (col >= position_.size() || position_[col] == kNone) return std::nullopt;
    return position_[col];
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::size_t width_ = 0;
  std::vector<std::size_t> mutable_;
  std::vector<std::size_t> immutable_;
  std::vector<std::size_t> position_;
};

}  // namespace cfx
