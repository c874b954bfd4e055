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

#include <algorithm>
#include <cmath>
#include <limits>

#include "cutflow/error.hpp"
#include "cutflow/fuzz.hpp"

namespace cutflow {

namespace {

constexpr int kSampleAttempts = 64;
constexpr double kSpecialChance = 0.01;

std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  return std::mt19937_64(seq);
}

std::int64_t pick(std::pair<std::int64_t, std::int64_t> iv, std::int64_t m, std::mt19937_64& rng) {
  std::int64_t count = (iv.second - iv.first) / m;
  return iv.first + m * std::uniform_int_distribution<std::int64_t>(0, count)(rng);
}

ValueRange effective(const ConstraintSet& cs, const std::string& name, DType dtype) {
  if (dtype == DType::kBool) return {0, 1};
  ValueRange r = cs.range_of(name, dtype);
  if (!is_float(dtype)) r = {std::ceil(r.lo), std::floor(r.hi)};
  if (dtype == DType::kI32) {
    r.lo = std::max<double>(r.lo, std::numeric_limits<std::int32_t>::min());
    r.hi = std::min<double>(r.hi, std::numeric_limits<std::int32_t>::max());
  }
  return r;
}

void store(Buffer& b, std::size_t k, double v) {
  if (is_float(b.dtype)) {
    b.f[k] = b.dtype == DType::kF32 ? static_cast<double>(static_cast<float>(v)) : v;
  } else {
    b.i[k] = static_cast<std::int64_t>(std::llround(v));
  }
}

double clamp_to(double v, const ValueRange& r, DType dtype) {
  if (std::isnan(v)) return r.lo;
  v = std::clamp(v, r.lo, r.hi);
  if (!is_float(dtype)) v = std::round(v);
  if (dtype == DType::kF32) {
    // Rounding to float may leave the range by half an ulp.
    float f = static_cast<float>(v);
    if (f < r.lo) f = std::nextafter(f, std::numeric_limits<float>::infinity());
    if (f > r.hi) f = std::nextafter(f, -std::numeric_limits<float>::infinity());
    v = f;
  }
  return v;
}

std::vector<double> specials(const ValueRange& r, bool allow_nan_inf) {
  std::vector<double> out{0.0, r.lo, r.hi};
  if (0.0 < r.lo || 0.0 > r.hi) out.erase(out.begin());
  if (allow_nan_inf) {
    out.push_back(std::numeric_limits<double>::quiet_NaN());
    out.push_back(std::numeric_limits<double>::infinity());
    out.push_back(-std::numeric_limits<double>::infinity());
  }
  return out;
}

Buffer fill(const ConstraintSet& cs, const std::string& name, const DataDescriptor& desc,
            std::vector<std::int64_t> shape, std::mt19937_64& rng) {
  Buffer b = Buffer::zeros(desc.dtype, std::move(shape));
  ValueRange r = effective(cs, name, desc.dtype);
  for (std::size_t k = 0; k < b.size(); ++k) {
    if (is_float(desc.dtype)) {
      store(b, k, clamp_to(std::uniform_real_distribution<double>(r.lo, r.hi)(rng), r, desc.dtype));
    } else {
      store(b, k, static_cast<double>(std::uniform_int_distribution<std::int64_t>(
                      static_cast<std::int64_t>(r.lo), static_cast<std::int64_t>(r.hi))(rng)));
    }
  }
  if (b.size() > 0 && std::bernoulli_distribution(kSpecialChance)(rng)) {
    auto sv = specials(r, cs.allow_nan_inf && is_float(desc.dtype));
    std::size_t k = std::uniform_int_distribution<std::size_t>(0, b.size() - 1)(rng);
    double v = sv[std::uniform_int_distribution<std::size_t>(0, sv.size() - 1)(rng)];
    store(b, k, std::isfinite(v) ? clamp_to(v, r, desc.dtype) : v);
  }
  return b;
}

std::optional<std::vector<std::int64_t>> shape_of(const DataDescriptor& desc, const Binding& b) {
  std::vector<std::int64_t> shape;
  for (const auto& e : desc.shape) {
    std::int64_t v = e.eval(b);
    if (v < 0) return std::nullopt;
    shape.push_back(v);
  }
  return shape;
}

// Draws symbols in order; false when some interval comes out empty.
bool draw_symbols(const ConstraintSet& cs, Binding& b, std::mt19937_64& rng) {
  for (const auto& s : cs.symbols) {
    auto iv = cs.resolve(s, b);
    if (!iv) return false;
    b[s.name] = pick(*iv, s.multiple_of, rng);
  }
  return true;
}

}  // namespace

ExecutionInput sample(const ConstraintSet& cs, const Program& cutout, std::mt19937_64& rng) {
  for (int attempt = 0; attempt < kSampleAttempts; ++attempt) {
    ExecutionInput in;
    if (!draw_symbols(cs, in.symbols, rng)) continue;
    bool ok = true;
    for (const auto& [name, desc] : cutout.containers) {
      if (desc.transient) continue;
      auto shape = shape_of(desc, in.symbols);
      if (!shape) {
        ok = false;
        break;
      }
      in.data[name] = fill(cs, name, desc, *shape, rng);
    }
    if (ok) return in;
  }
  throw Error(ErrorCode::kEmptyInterval, "no symbol assignment satisfies the constraints after " +
                                             std::to_string(kSampleAttempts) + " draws");
}

ExecutionInput sample(const ConstraintSet& cs, const Program& cutout, std::uint64_t seed, std::uint64_t trial) {
  auto rng = trial_rng(seed, trial);
  return sample(cs, cutout, rng);
}

ExecutionInput mutate(const ConstraintSet& cs, const Program& cutout, const ExecutionInput& in, std::mt19937_64& rng) {
  ExecutionInput out = in;
  std::vector<std::string> buffers;
  for (const auto& [name, b] : out.data) {
    if (b.size() > 0) buffers.push_back(name);
  }
  bool symbolic = !cs.symbols.empty() && (buffers.empty() || std::bernoulli_distribution(0.2)(rng));
  if (symbolic) {
    const auto& s = cs.symbols[std::uniform_int_distribution<std::size_t>(0, cs.symbols.size() - 1)(rng)];
    std::int64_t delta = std::bernoulli_distribution(0.5)(rng) ? s.multiple_of : -s.multiple_of;
    out.symbols[s.name] += delta;
    // Re-clamp every symbol in order; later intervals may depend on this one.
    for (const auto& t : cs.symbols) {
      auto iv = cs.resolve(t, out.symbols);
      if (!iv) return in;
      std::int64_t& v = out.symbols[t.name];
      v = std::clamp(v, iv->first, iv->second);
    }
    for (const auto& [name, desc] : cutout.containers) {
      if (desc.transient) continue;
      auto shape = shape_of(desc, out.symbols);
      if (!shape) return in;
      if (out.data.count(name) && out.data.at(name).shape == *shape) continue;
      out.data[name] = fill(cs, name, desc, *shape, rng);
    }
    return out;
  }
  if (buffers.empty()) return out;
  const std::string& name = buffers[std::uniform_int_distribution<std::size_t>(0, buffers.size() - 1)(rng)];
  Buffer& b = out.data.at(name);
  ValueRange r = effective(cs, name, b.dtype);
  std::size_t k = std::uniform_int_distribution<std::size_t>(0, b.size() - 1)(rng);
  double v = b.as_double(k);
  double span = r.hi - r.lo;
  switch (std::uniform_int_distribution<int>(0, 4)(rng)) {
    case 0: v += std::normal_distribution<double>(0, 0.1 * span + 1e-9)(rng); break;
    case 1: v *= 2; break;
    case 2: v = -v; break;
    case 3: {
      auto sv = specials(r, false);
      v = sv[std::uniform_int_distribution<std::size_t>(0, sv.size() - 1)(rng)];
      break;
    }
    default: v = std::uniform_real_distribution<double>(r.lo, r.hi)(rng); break;
  }
  store(b, k, clamp_to(v, r, b.dtype));
  return out;
}

}  // namespace cutflow
