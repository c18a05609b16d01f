// pase/checkpoint.h

// Copyright 2026  The pase-cpp Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pase/common.h"

namespace pase {

// Self-describing container of named tensors plus string metadata, used for
// checkpoints and probe models. The binary layout is versioned, little
// endian, and protected by a trailing checksum; loads either succeed fully
// or throw without partial state.
class StateContainer {
 public:
  void put_f32(const std::string& name, Shape shape,
               const std::vector<float>& data);
  void put_f64(const std::string& name, Shape shape,
               const std::vector<double>& data);
  void put_meta(const std::string& key, const std::string& value);

  bool has_tensor(const std::string& name) const;
  const std::vector<float>& f32(const std::string& name,
                                const Shape& expected) const;
  const std::vector<double>& f64(const std::string& name,
                                 const Shape& expected) const;
  const Shape& tensor_shape(const std::string& name) const;
  std::vector<std::string> tensor_names() const;

  bool has_meta(const std::string& key) const;
  const std::string& meta(const std::string& key) const;
  const std::map<std::string, std::string>& all_meta() const { return meta_; }

  // Atomic write: temp file in the same directory, then rename.
  void save(const std::string& path) const;
  static StateContainer load(const std::string& path);

 private:
  struct Entry {
    Shape shape;
    uint8_t dtype = 0;  // 0 = f32, 1 = f64
    std::vector<float> f32;
    std::vector<double> f64;
  };
  std::map<std::string, Entry> tensors_;
  std::map<std::string, std::string> meta_;
};

// FNV-1a, used for config fingerprints.
uint64_t fnv1a_hash(const std::string& text);

}  // namespace pase
