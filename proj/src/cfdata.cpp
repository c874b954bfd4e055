// Copyright 2026 The cutflow Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cutflow/cfdata.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

#include "cutflow/error.hpp"
#include "cutflow/ir_io.hpp"

namespace cutflow {

namespace {

constexpr char kMagic[8] = {'C', 'F', 'D', 'A', 'T', 'A', '1', '\0'};

template <typename T>
void put(std::string& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.append(reinterpret_cast<const char*>(b), sizeof(T));
}

void put_name(std::string& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out += s;
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : b_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    unsigned char raw[sizeof(T)];
    std::memcpy(raw, b_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    pos_ += sizeof(T);
    T v;
    std::memcpy(&v, raw, sizeof(T));
    return v;
  }

  std::string name() {
    auto n = get<std::uint32_t>();
    need(n);
    std::string s(b_.substr(pos_, n));
    pos_ += n;
    return s;
  }

  void expect_magic() {
    need(sizeof(kMagic));
    if (std::memcmp(b_.data(), kMagic, sizeof(kMagic)) != 0) fail("bad magic");
    pos_ += sizeof(kMagic);
  }

  bool done() const { return pos_ == b_.size(); }
  [[noreturn]] static void fail(const std::string& what) {
    throw Error(ErrorCode::kMalformedDocument, "cfdata: " + what);
  }

 private:
  void need(std::size_t n) const {
    if (b_.size() - pos_ < n) fail("truncated");
  }
  std::string_view b_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_data(const ExecutionInput& in) {
  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(in.symbols.size()));
  for (const auto& [name, v] : in.symbols) {
    put_name(out, name);
    put<std::int64_t>(out, v);
  }
  put<std::uint32_t>(out, static_cast<std::uint32_t>(in.data.size()));
  for (const auto& [name, b] : in.data) {
    put_name(out, name);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(b.dtype));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(b.shape.size()));
    for (auto d : b.shape) put<std::int64_t>(out, d);
    for (std::size_t k = 0; k < b.size(); ++k) {
      switch (b.dtype) {
        case DType::kF64: put<double>(out, b.f[k]); break;
        case DType::kF32: put<float>(out, static_cast<float>(b.f[k])); break;
        case DType::kI64: put<std::int64_t>(out, b.i[k]); break;
        case DType::kI32: put<std::int32_t>(out, static_cast<std::int32_t>(b.i[k])); break;
        case DType::kBool: put<std::uint8_t>(out, b.i[k] != 0); break;
      }
    }
  }
  return out;
}

ExecutionInput decode_data(std::string_view bytes) {
  Reader r(bytes);
  r.expect_magic();
  ExecutionInput in;
  auto nsym = r.get<std::uint32_t>();
  for (std::uint32_t k = 0; k < nsym; ++k) {
    std::string name = r.name();
    in.symbols[name] = r.get<std::int64_t>();
  }
  auto nbuf = r.get<std::uint32_t>();
  for (std::uint32_t k = 0; k < nbuf; ++k) {
    std::string name = r.name();
    auto tag = r.get<std::uint8_t>();
    if (tag > static_cast<std::uint8_t>(DType::kBool)) Reader::fail("unknown dtype tag for " + name);
    auto rank = r.get<std::uint32_t>();
    if (rank > 16) Reader::fail("rank too large for " + name);
    std::vector<std::int64_t> shape;
    std::int64_t total = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      auto e = r.get<std::int64_t>();
      if (e < 0 || (e > 0 && total > (std::int64_t{1} << 40) / e)) Reader::fail("bad extent for " + name);
      shape.push_back(e);
      total *= e;
    }
    if (static_cast<std::uint64_t>(total) * dtype_size(static_cast<DType>(tag)) > bytes.size()) {
      Reader::fail("truncated");
    }
    Buffer b = Buffer::zeros(static_cast<DType>(tag), shape);
    for (std::size_t e = 0; e < b.size(); ++e) {
      switch (b.dtype) {
        case DType::kF64: b.f[e] = r.get<double>(); break;
        case DType::kF32: b.f[e] = r.get<float>(); break;
        case DType::kI64: b.i[e] = r.get<std::int64_t>(); break;
        case DType::kI32: b.i[e] = r.get<std::int32_t>(); break;
        case DType::kBool: b.i[e] = r.get<std::uint8_t>() != 0; break;
      }
    }
    in.data[name] = std::move(b);
  }
  if (!r.done()) Reader::fail("trailing bytes");
  return in;
}

ExecutionInput load_data(const std::string& path) { return decode_data(read_file(path)); }

void save_data(const ExecutionInput& in, const std::string& path) { write_file(path, encode_data(in)); }

}  // namespace cutflow
