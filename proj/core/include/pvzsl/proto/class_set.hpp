// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace pvzsl {

/// Class ids are 1-based: sources are 1..S, targets are S+1..S+T.
using ClassId = std::uint32_t;

enum class Side { source, target };

struct ClassLayout {
  std::size_t num_source = 0;
  std::size_t num_target = 0;

  std::size_t num_classes() const noexcept { return num_source + num_target; }
  bool valid_id(ClassId id) const noexcept { return id >= 1 && id <= num_classes(); }
  bool is_source(ClassId id) const noexcept { return id >= 1 && id <= num_source; }
  bool is_target(ClassId id) const noexcept { return id > num_source && id <= num_classes(); }
  Side side_of(ClassId id) const noexcept { return is_source(id) ? Side::source : Side::target; }
  /// Row of the class in the attribute table V and the prototype matrix Z.
  static std::size_t row_of(ClassId id) noexcept { return id - 1; }

  bool operator==(const ClassLayout&) const = default;
};

enum class SetSide { source, target, all };

/// Ordered, non-empty set of class ids that a probability vector is computed over.
class ClassSet {
 public:
  static ClassSet source(const ClassLayout& layout);
  static ClassSet target(const ClassLayout& layout);
  static ClassSet all(const ClassLayout& layout);
  static ClassSet of(SetSide side, const ClassLayout& layout);

  /// Validates that ids are non-empty, unique, and consistent with `side`; stores them sorted.
  ClassSet(std::vector<ClassId> ids, SetSide side, const ClassLayout& layout);

  const std::vector<ClassId>& ids() const noexcept { return ids_; }
  SetSide side() const noexcept { return side_; }
  std::size_t size() const noexcept { return ids_.size(); }
  ClassId id(std::size_t k) const noexcept { return ids_[k]; }
  Side side_of(std::size_t k) const noexcept { return sides_[k]; }
  /// Position of `id` in this set; throws ValidationError if absent.
  std::size_t index_of(ClassId id) const;
  bool contains(ClassId id) const noexcept;

 private:
  std::vector<ClassId> ids_;
  std::vector<Side> sides_;
  SetSide side_;
};

}  // namespace pvzsl
