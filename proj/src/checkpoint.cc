// pase/checkpoint.cc

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

#include "pase/checkpoint.h"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace pase {

namespace {

constexpr char kMagic[8] = {'P', 'A', 'S', 'E', 'C', 'K', 'P', 'T'};
constexpr uint32_t kVersion = 1;

void append_bytes(std::string& buf, const void* p, size_t n) {
  buf.append(static_cast<const char*>(p), n);
}
void append_u8(std::string& buf, uint8_t v) { append_bytes(buf, &v, 1); }
void append_u32(std::string& buf, uint32_t v) { append_bytes(buf, &v, 4); }
void append_u64(std::string& buf, uint64_t v) { append_bytes(buf, &v, 8); }
void append_i64(std::string& buf, int64_t v) { append_bytes(buf, &v, 8); }
void append_str(std::string& buf, const std::string& s) {
  append_u32(buf, static_cast<uint32_t>(s.size()));
  buf.append(s);
}

// Bounds-checked cursor over a loaded byte buffer.
struct Reader {
  const std::string& buf;
  size_t pos = 0;
  const std::string path;

  void need(size_t n) const {
    if (pos + n > buf.size()) {
      throw std::runtime_error("checkpoint '" + path + "': truncated file");
    }
  }
  void read(void* out, size_t n) {
    need(n);
    std::memcpy(out, buf.data() + pos, n);
    pos += n;
  }
  uint8_t u8() { uint8_t v; read(&v, 1); return v; }
  uint32_t u32() { uint32_t v; read(&v, 4); return v; }
  uint64_t u64() { uint64_t v; read(&v, 8); return v; }
  int64_t i64() { int64_t v; read(&v, 8); return v; }
  std::string str() {
    const uint32_t n = u32();
    need(n);
    std::string s(buf.data() + pos, n);
    pos += n;
    return s;
  }
};

uint64_t fnv1a_bytes(const char* p, size_t n) {
  uint64_t h = 1469598103934665603ull;
  for (size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(p[i]);
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

uint64_t fnv1a_hash(const std::string& text) {
  return fnv1a_bytes(text.data(), text.size());
}

void StateContainer::put_f32(const std::string& name, Shape shape,
                             const std::vector<float>& data) {
  check_arg(shape_numel(shape) == static_cast<int64_t>(data.size()),
            "checkpoint: data does not match shape for '" + name + "'");
  Entry e;
  e.shape = std::move(shape);
  e.dtype = 0;
  e.f32 = data;
  tensors_[name] = std::move(e);
}

void StateContainer::put_f64(const std::string& name, Shape shape,
                             const std::vector<double>& data) {
  check_arg(shape_numel(shape) == static_cast<int64_t>(data.size()),
            "checkpoint: data does not match shape for '" + name + "'");
  Entry e;
  e.shape = std::move(shape);
  e.dtype = 1;
  e.f64 = data;
  tensors_[name] = std::move(e);
}

void StateContainer::put_meta(const std::string& key, const std::string& value) {
  meta_[key] = value;
}

bool StateContainer::has_tensor(const std::string& name) const {
  return tensors_.count(name) > 0;
}

const std::vector<float>& StateContainer::f32(const std::string& name,
                                              const Shape& expected) const {
  auto it = tensors_.find(name);
  check_arg(it != tensors_.end(), "checkpoint: missing tensor '" + name + "'");
  check_arg(it->second.dtype == 0,
            "checkpoint: tensor '" + name + "' is not f32");
  check_arg(it->second.shape == expected,
            "checkpoint: tensor '" + name + "' has shape " +
                shape_str(it->second.shape) + ", expected " +
                shape_str(expected));
  return it->second.f32;
}

const std::vector<double>& StateContainer::f64(const std::string& name,
                                               const Shape& expected) const {
  auto it = tensors_.find(name);
  check_arg(it != tensors_.end(), "checkpoint: missing tensor '" + name + "'");
  check_arg(it->second.dtype == 1,
            "checkpoint: tensor '" + name + "' is not f64");
  check_arg(it->second.shape == expected,
            "checkpoint: tensor '" + name + "' has shape " +
                shape_str(it->second.shape) + ", expected " +
                shape_str(expected));
  return it->second.f64;
}

const Shape& StateContainer::tensor_shape(const std::string& name) const {
  auto it = tensors_.find(name);
  check_arg(it != tensors_.end(), "checkpoint: missing tensor '" + name + "'");
  return it->second.shape;
}

std::vector<std::string> StateContainer::tensor_names() const {
  std::vector<std::string> names;
  names.reserve(tensors_.size());
  for (const auto& [name, e] : tensors_) names.push_back(name);
  return names;
}

bool StateContainer::has_meta(const std::string& key) const {
  return meta_.count(key) > 0;
}

const std::string& StateContainer::meta(const std::string& key) const {
  auto it = meta_.find(key);
  check_arg(it != meta_.end(), "checkpoint: missing meta key '" + key + "'");
  return it->second;
}

void StateContainer::save(const std::string& path) const {
  std::string buf;
  append_bytes(buf, kMagic, 8);
  append_u32(buf, kVersion);
  append_u32(buf, static_cast<uint32_t>(meta_.size()));
  for (const auto& [k, v] : meta_) {
    append_str(buf, k);
    append_str(buf, v);
  }
  append_u32(buf, static_cast<uint32_t>(tensors_.size()));
  for (const auto& [name, e] : tensors_) {
    append_str(buf, name);
    append_u8(buf, e.dtype);
    append_u32(buf, static_cast<uint32_t>(e.shape.size()));
    for (int64_t d : e.shape) append_i64(buf, d);
    const uint64_t count = static_cast<uint64_t>(shape_numel(e.shape));
    append_u64(buf, count);
    if (e.dtype == 0) {
      append_bytes(buf, e.f32.data(), count * sizeof(float));
    } else {
      append_bytes(buf, e.f64.data(), count * sizeof(double));
    }
  }
  append_u64(buf, fnv1a_bytes(buf.data(), buf.size()));

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("checkpoint: cannot open '" + tmp + "'");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw std::runtime_error("checkpoint: short write to '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("checkpoint: cannot rename into '" + path + "'");
  }
}

StateContainer StateContainer::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open '" + path + "'");
  std::string buf((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());

  if (buf.size() < 8 + 4 + 8 || std::memcmp(buf.data(), kMagic, 8) != 0) {
    throw std::runtime_error("checkpoint '" + path + "': bad magic");
  }
  const uint64_t stored_sum =
      fnv1a_bytes(buf.data(), buf.size() - 8);
  uint64_t file_sum;
  std::memcpy(&file_sum, buf.data() + buf.size() - 8, 8);
  if (stored_sum != file_sum) {
    throw std::runtime_error("checkpoint '" + path + "': checksum mismatch");
  }

  Reader r{buf, 8, path};
  const uint32_t version = r.u32();
  if (version != kVersion) {
    throw std::runtime_error("checkpoint '" + path + "': unsupported version " +
                             std::to_string(version));
  }
  StateContainer c;
  const uint32_t n_meta = r.u32();
  for (uint32_t i = 0; i < n_meta; ++i) {
    std::string k = r.str();
    c.meta_[k] = r.str();
  }
  const uint32_t n_tensors = r.u32();
  for (uint32_t i = 0; i < n_tensors; ++i) {
    std::string name = r.str();
    Entry e;
    e.dtype = r.u8();
    if (e.dtype > 1) {
      throw std::runtime_error("checkpoint '" + path + "': bad dtype");
    }
    const uint32_t rank = r.u32();
    e.shape.resize(rank);
    for (uint32_t d = 0; d < rank; ++d) e.shape[d] = r.i64();
    const uint64_t count = r.u64();
    if (static_cast<int64_t>(count) != shape_numel(e.shape)) {
      throw std::runtime_error("checkpoint '" + path +
                               "': element count does not match shape");
    }
    if (e.dtype == 0) {
      e.f32.resize(count);
      r.read(e.f32.data(), count * sizeof(float));
    } else {
      e.f64.resize(count);
      r.read(e.f64.data(), count * sizeof(double));
    }
    c.tensors_[name] = std::move(e);
  }
  return c;
}

}  // namespace pase
