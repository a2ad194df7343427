#include <bit>
#include <cstring>
#include <string>

#include "kdg/error.hpp"
#include "kdg/subdomain.hpp"

namespace kdg {
namespace {

constexpr std::size_t kHeaderBytes = 12;

void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::byte>((v >> (8 * b)) & 0xffu));
}

void put_f64(std::vector<std::byte>& out, double x) {
  const auto bits = std::bit_cast<std::uint64_t>(x);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::byte>((bits >> (8 * b)) & 0xffu));
}

std::uint32_t get_u32(const std::byte* p) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(p[b]) << (8 * b);
  return v;
}

double get_f64(const std::byte* p) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  return std::bit_cast<double>(v);
}

}  // namespace

std::vector<std::byte> encode_payload(const TracePayload& payload) {
  std::vector<std::byte> out;
  out.reserve(kHeaderBytes + 8 * payload.values.size());
  put_u32(out, payload.iteration);
  put_u32(out, payload.velocity);
  put_u32(out, payload.face_count);
  for (double x : payload.values) put_f64(out, x);
  return out;
}

TracePayload decode_payload(std::span<const std::byte> bytes, std::size_t values_per_face) {
  if (bytes.size() < kHeaderBytes) throw Error("trace payload shorter than its header");
  TracePayload p;
  p.iteration = get_u32(bytes.data());
  p.velocity = get_u32(bytes.data() + 4);
  p.face_count = get_u32(bytes.data() + 8);
  const std::size_t n = static_cast<std::size_t>(p.face_count) * values_per_face;
  if (bytes.size() != kHeaderBytes + 8 * n) {
    throw Error("trace payload of " + std::to_string(bytes.size()) + " bytes does not match " +
                std::to_string(p.face_count) + " faces");
  }
  p.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) p.values[i] = get_f64(bytes.data() + kHeaderBytes + 8 * i);
  return p;
}

}  // namespace kdg
