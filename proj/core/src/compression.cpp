#include "cslearn/compression.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cslearn {
namespace {

// Levels are exact integers in a double only up to 2^53.
constexpr std::size_t kMaxQsgdBits = 53;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double squared_norm(std::span<const double> x) {
  return std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
}

std::uint64_t ceil_log2(std::size_t m) {
  return m <= 1 ? 0 : static_cast<std::uint64_t>(std::bit_width(m - 1));
}

bool is_qsgd(CompressionKind kind) {
  return kind == CompressionKind::QsgdRandomized ||
         kind == CompressionKind::QsgdDeterministic;
}

SparsePayload keep(std::span<const double> x,
                   std::vector<std::uint32_t> indices) {
  std::sort(indices.begin(), indices.end());
  SparsePayload out;
  out.values.reserve(indices.size());
  for (auto idx : indices) out.values.push_back(x[idx]);
  out.indices = std::move(indices);
  return out;
}

SparsePayload top_k(std::span<const double> x, std::size_t k) {
  std::vector<std::uint32_t> order(x.size());
  std::iota(order.begin(), order.end(), 0U);
  // Larger magnitude first; equal magnitudes resolved by lower index.
  auto before = [&](std::uint32_t a, std::uint32_t b) {
    const double ma = std::abs(x[a]);
    const double mb = std::abs(x[b]);
    return ma > mb || (ma == mb && a < b);
  };
  std::nth_element(order.begin(), order.begin() + static_cast<long>(k) - 1,
                   order.end(), before);
  order.resize(k);
  return keep(x, std::move(order));
}

SparsePayload rand_k(std::span<const double> x, std::size_t k, Rng& rng) {
  std::vector<std::uint32_t> order(x.size());
  std::iota(order.begin(), order.end(), 0U);
  // Fisher-Yates prefix: the first k slots form a uniform k-subset.
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, x.size() - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  order.resize(k);
  return keep(x, std::move(order));
}

QuantizedPayload qsgd(std::span<const double> x, const CompressionSpec& spec,
                      Rng& rng) {
  const std::int64_t u = spec.levels();
  QuantizedPayload out;
  out.max_level = u;
  out.levels.assign(x.size(), 0);
  const double norm = std::sqrt(squared_norm(x));
  if (norm == 0.0) return out;

  const double ud = static_cast<double>(u);
  out.norm = norm;
  out.scale = omega(spec, x.size()) * norm / ud;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double zeta =
        spec.kind == CompressionKind::QsgdDeterministic ? 0.5 : unit(rng);
    const double level =
        std::min(std::floor(ud * std::abs(x[j]) / norm + zeta), ud);
    const auto magnitude = static_cast<std::int64_t>(level);
    out.levels[j] = x[j] < 0.0 ? -magnitude : magnitude;
  }
  return out;
}

}  // namespace

CompressionSpec CompressionSpec::full(std::size_t scalar_bits) {
  return {CompressionKind::Full, 0, scalar_bits};
}

CompressionSpec CompressionSpec::rand_k(std::size_t k,
                                        std::size_t scalar_bits) {
  return {CompressionKind::RandK, k, scalar_bits};
}

CompressionSpec CompressionSpec::top_k(std::size_t k, std::size_t scalar_bits) {
  return {CompressionKind::TopK, k, scalar_bits};
}

CompressionSpec CompressionSpec::qsgd(std::size_t bits, bool deterministic,
                                      std::size_t scalar_bits) {
  return {deterministic ? CompressionKind::QsgdDeterministic
                        : CompressionKind::QsgdRandomized,
          bits, scalar_bits};
}

std::int64_t CompressionSpec::levels() const {
  if (!is_qsgd(kind)) {
    throw std::logic_error("quantization levels requested for a sparsifier");
  }
  if (k < 2 || k > kMaxQsgdBits) {
    throw std::invalid_argument("qsgd bits must lie in [2, 53], got " +
                                std::to_string(k));
  }
  return (std::int64_t{1} << (k - 1)) - 1;
}

void CompressionSpec::validate(std::size_t m) const {
  if (m == 0) throw std::invalid_argument("compression dimension must be >= 1");
  if (scalar_bits == 0) throw std::invalid_argument("scalar_bits must be >= 1");
  switch (kind) {
    case CompressionKind::Full:
      return;
    case CompressionKind::RandK:
    case CompressionKind::TopK:
      if (k < 1 || k > m) {
        throw std::invalid_argument(label() + ": k must lie in [1, m=" +
                                    std::to_string(m) + "]");
      }
      return;
    case CompressionKind::QsgdRandomized:
    case CompressionKind::QsgdDeterministic:
      if (k < 2 || k > std::min(scalar_bits, kMaxQsgdBits)) {
        throw std::invalid_argument(
            label() + ": qsgd bits must lie in [2, min(scalar_bits, 53)]");
      }
      return;
  }
}

std::string CompressionSpec::label() const {
  switch (kind) {
    case CompressionKind::Full:
      return "full";
    case CompressionKind::RandK:
      return "rand_k" + std::to_string(k);
    case CompressionKind::TopK:
      return "top_k" + std::to_string(k);
    case CompressionKind::QsgdRandomized:
      return "qsgd_" + std::to_string(k) + "bit";
    case CompressionKind::QsgdDeterministic:
      return "qsgd_det_" + std::to_string(k) + "bit";
  }
  return "unknown";
}

std::string to_string(CompressionKind kind) {
  switch (kind) {
    case CompressionKind::Full:
      return "full";
    case CompressionKind::RandK:
      return "rand_k";
    case CompressionKind::TopK:
      return "top_k";
    case CompressionKind::QsgdRandomized:
      return "qsgd";
    case CompressionKind::QsgdDeterministic:
      return "qsgd_det";
  }
  return "unknown";
}

CompressionKind parse_compression_kind(const std::string& name) {
  for (auto kind :
       {CompressionKind::Full, CompressionKind::RandK, CompressionKind::TopK,
        CompressionKind::QsgdRandomized, CompressionKind::QsgdDeterministic}) {
    if (to_string(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown compression kind '" + name +
                              "' (expected full, rand_k, top_k, qsgd, qsgd_det)");
}

double omega(const CompressionSpec& spec, std::size_t m) {
  spec.validate(m);
  const double md = static_cast<double>(m);
  switch (spec.kind) {
    case CompressionKind::Full:
      return 1.0;
    case CompressionKind::RandK:
    case CompressionKind::TopK:
      return static_cast<double>(spec.k) / md;
    case CompressionKind::QsgdRandomized:
    case CompressionKind::QsgdDeterministic: {
      const double u = static_cast<double>(spec.levels());
      return 1.0 / (1.0 + std::min(md / (u * u), std::sqrt(md) / u));
    }
  }
  return 1.0;
}

std::uint64_t encoded_bits(const CompressionSpec& spec, std::size_t m) {
  spec.validate(m);
  const std::uint64_t b = spec.scalar_bits;
  switch (spec.kind) {
    case CompressionKind::Full:
      return m * b;
    case CompressionKind::RandK:
    case CompressionKind::TopK:
      return spec.k * (b + ceil_log2(m));
    case CompressionKind::QsgdRandomized:
    case CompressionKind::QsgdDeterministic:
      return m * spec.k + b;
  }
  return 0;
}

CompressedVector compress(const CompressionSpec& spec,
                          std::span<const double> x, Rng& rng) {
  spec.validate(x.size());
  for (double v : x) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("compress: nonfinite input coordinate");
    }
  }
  CompressedVector out;
  out.dimension = x.size();
  out.encoded_bits = encoded_bits(spec, x.size());
  switch (spec.kind) {
    case CompressionKind::Full:
      out.payload = DensePayload{{x.begin(), x.end()}};
      break;
    case CompressionKind::TopK:
      out.payload = top_k(x, spec.k);
      break;
    case CompressionKind::RandK:
      out.payload = rand_k(x, spec.k, rng);
      break;
    case CompressionKind::QsgdRandomized:
    case CompressionKind::QsgdDeterministic:
      out.payload = qsgd(x, spec, rng);
      break;
  }
  return out;
}

std::vector<double> densify(const CompressedVector& cv) {
  std::vector<double> out(cv.dimension, 0.0);
  accumulate(cv, 1.0, out);
  return out;
}

void accumulate(const CompressedVector& cv, double weight,
                std::span<double> out) {
  if (out.size() != cv.dimension) {
    throw std::invalid_argument("compressed vector dimension " +
                                std::to_string(cv.dimension) +
                                " does not match target of size " +
                                std::to_string(out.size()));
  }
  std::visit(
      overloaded{
          [&](const DensePayload& p) {
            if (p.values.size() != cv.dimension) {
              throw std::invalid_argument("malformed dense payload");
            }
            for (std::size_t j = 0; j < p.values.size(); ++j) {
              out[j] += weight * p.values[j];
            }
          },
          [&](const SparsePayload& p) {
            if (p.indices.size() != p.values.size()) {
              throw std::invalid_argument("malformed sparse payload");
            }
            for (std::size_t s = 0; s < p.indices.size(); ++s) {
              if (p.indices[s] >= cv.dimension ||
                  (s > 0 && p.indices[s] <= p.indices[s - 1])) {
                throw std::invalid_argument("malformed sparse payload indices");
              }
              out[p.indices[s]] += weight * p.values[s];
            }
          },
          [&](const QuantizedPayload& p) {
            if (p.levels.size() != cv.dimension || p.norm < 0.0) {
              throw std::invalid_argument("malformed quantized payload");
            }
            for (std::size_t j = 0; j < p.levels.size(); ++j) {
              if (p.levels[j] == 0) continue;
              if (p.levels[j] > p.max_level || p.levels[j] < -p.max_level) {
                throw std::invalid_argument("quantized level out of range");
              }
              out[j] += weight * p.scale * static_cast<double>(p.levels[j]);
            }
          },
      },
      cv.payload);
}

}  // namespace cslearn
