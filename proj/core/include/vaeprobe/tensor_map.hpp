/*
 * Copyright 2026 The vaeprobe Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef VAEPROBE_TENSOR_MAP_HPP
#define VAEPROBE_TENSOR_MAP_HPP

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vaeprobe/errors.hpp"
#include "vaeprobe/tensor.hpp"

namespace vaeprobe {

/// Name -> tensor map that iterates in insertion order. Names are unique.
template <class T>
class TensorMap {
 public:
  using Entry = std::pair<std::string, BasicTensor<T>>;

  void insert(std::string name, BasicTensor<T> value) {
    if (index_.contains(name)) throw Error("duplicate tensor name '" + name + "'");
    index_.emplace(name, entries_.size());
    entries_.emplace_back(std::move(name), std::move(value));
  }

  bool contains(const std::string& name) const { return index_.contains(name); }

  const BasicTensor<T>& at(const std::string& name) const { return entries_[locate(name)].second; }
  BasicTensor<T>& at(const std::string& name) { return entries_[locate(name)].second; }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  /// Appends every entry of `other`; names must not collide.
  void merge(const TensorMap& other) {
    for (const auto& [name, value] : other) insert(name, value);
  }

  template <class U>
  TensorMap<U> cast() const {
    TensorMap<U> out;
    for (const auto& [name, value] : entries_) out.insert(name, value.template cast<U>());
    return out;
  }

  friend bool operator==(const TensorMap& a, const TensorMap& b) { return a.entries_ == b.entries_; }

 private:
  std::size_t locate(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw Error("no tensor named '" + name + "'");
    return it->second;
  }

  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace vaeprobe

#endif  // VAEPROBE_TENSOR_MAP_HPP
