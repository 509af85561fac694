// Copyright 2026 The pvzsl Authors.
// SPDX-License-Identifier: Apache-2.0

#include "pvzsl/proto/class_set.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "pvzsl/ndcore/errors.hpp"

namespace pvzsl {

namespace {

std::vector<ClassId> id_range(std::size_t first, std::size_t count) {
  std::vector<ClassId> ids(count);
  std::iota(ids.begin(), ids.end(), static_cast<ClassId>(first));
  return ids;
}

}  // namespace

ClassSet ClassSet::source(const ClassLayout& layout) {
  return ClassSet(id_range(1, layout.num_source), SetSide::source, layout);
}

ClassSet ClassSet::target(const ClassLayout& layout) {
  return ClassSet(id_range(layout.num_source + 1, layout.num_target), SetSide::target, layout);
}

ClassSet ClassSet::all(const ClassLayout& layout) {
  return ClassSet(id_range(1, layout.num_classes()), SetSide::all, layout);
}

ClassSet ClassSet::of(SetSide side, const ClassLayout& layout) {
  switch (side) {
    case SetSide::source:
      return source(layout);
    case SetSide::target:
      return target(layout);
    case SetSide::all:
      break;
  }
  return all(layout);
}

ClassSet::ClassSet(std::vector<ClassId> ids, SetSide side, const ClassLayout& layout)
    : ids_(std::move(ids)), side_(side) {
  if (ids_.empty()) throw ValidationError("ClassSet: empty class set");
  std::sort(ids_.begin(), ids_.end());
  if (std::adjacent_find(ids_.begin(), ids_.end()) != ids_.end()) {
    throw ValidationError("ClassSet: duplicate class id");
  }
  sides_.reserve(ids_.size());
  for (ClassId id : ids_) {
    const bool ok = side == SetSide::source   ? layout.is_source(id)
                    : side == SetSide::target ? layout.is_target(id)
                                              : layout.valid_id(id);
    if (!ok) {
      throw ValidationError("ClassSet: class id " + std::to_string(id) +
                            " inconsistent with the requested side");
    }
    sides_.push_back(layout.side_of(id));
  }
}

std::size_t ClassSet::index_of(ClassId id) const {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  if (it == ids_.end() || *it != id) {
    throw ValidationError("class id " + std::to_string(id) + " not in class set");
  }
  return static_cast<std::size_t>(it - ids_.begin());
}

bool ClassSet::contains(ClassId id) const noexcept {
  return std::binary_search(ids_.begin(), ids_.end(), id);
}

}  // namespace pvzsl
