#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cslearn/rng.hpp"

namespace cslearn {

enum class CompressionKind {
  Full,
  RandK,
  TopK,
  QsgdRandomized,
  QsgdDeterministic,
};

/// A contractive compression operator: E||Q(x) - x||^2 <= (1 - omega)||x||^2.
///
/// `k` is the number of kept coordinates for the sparsifiers and the number
/// of bits per coordinate for the qsgd variants (u = 2^(k-1) - 1 levels plus
/// a sign bit). `scalar_bits` is the floating point baseline used for bit
/// accounting.
struct CompressionSpec {
  CompressionKind kind = CompressionKind::Full;
  std::size_t k = 0;
  std::size_t scalar_bits = 64;

  static CompressionSpec full(std::size_t scalar_bits = 64);
  static CompressionSpec rand_k(std::size_t k, std::size_t scalar_bits = 64);
  static CompressionSpec top_k(std::size_t k, std::size_t scalar_bits = 64);
  static CompressionSpec qsgd(std::size_t bits, bool deterministic = false,
                              std::size_t scalar_bits = 64);

  [[nodiscard]] bool randomized() const noexcept {
    return kind == CompressionKind::RandK ||
           kind == CompressionKind::QsgdRandomized;
  }

  /// Number of nonzero quantization levels; qsgd kinds only.
  [[nodiscard]] std::int64_t levels() const;

  /// Throws std::invalid_argument when the spec cannot act on R^m.
  void validate(std::size_t m) const;

  /// Short label such as "top_k3" or "qsgd_2bit", used for file names and
  /// plot legends.
  [[nodiscard]] std::string label() const;

  bool operator==(const CompressionSpec&) const = default;
};

[[nodiscard]] std::string to_string(CompressionKind kind);
[[nodiscard]] CompressionKind parse_compression_kind(const std::string& name);

struct DensePayload {
  std::vector<double> values;
  bool operator==(const DensePayload&) const = default;
};

// Indices strictly increasing.
struct SparsePayload {
  std::vector<std::uint32_t> indices;
  std::vector<double> values;
  bool operator==(const SparsePayload&) const = default;
};

// Coordinate j decodes to scale * levels[j]; scale = omega * norm / u.
struct QuantizedPayload {
  double norm = 0.0;
  double scale = 0.0;
  std::int64_t max_level = 0;
  std::vector<std::int64_t> levels;
  bool operator==(const QuantizedPayload&) const = default;
};

struct CompressedVector {
  std::size_t dimension = 0;
  std::variant<DensePayload, SparsePayload, QuantizedPayload> payload;
  std::uint64_t encoded_bits = 0;

  bool operator==(const CompressedVector&) const = default;
};

/// Contraction ratio of the operator on R^m: k/m for the sparsifiers,
/// (1 + min{m/u^2, sqrt(m)/u})^-1 for qsgd, 1 for Full.
[[nodiscard]] double omega(const CompressionSpec& spec, std::size_t m);

/// Payload size of one m-dimensional message: k(b + ceil(log2 m)) for the
/// sparsifiers, mk + b for qsgd, mb for Full.
[[nodiscard]] std::uint64_t encoded_bits(const CompressionSpec& spec,
                                         std::size_t m);

/// Applies Q to x. The rng is consumed only by RandK and QsgdRandomized.
[[nodiscard]] CompressedVector compress(const CompressionSpec& spec,
                                        std::span<const double> x, Rng& rng);

[[nodiscard]] std::vector<double> densify(const CompressedVector& cv);

/// out += weight * densify(cv), touching only the stored coordinates.
void accumulate(const CompressedVector& cv, double weight,
                std::span<double> out);

}  // namespace cslearn
