#include <bit>
#include <cstring>
#include <fstream>

#include <fmt/format.h>

#include "pssa/model.hpp"

namespace pssa {

namespace {

constexpr char kMagic[8] = {'P', 'S', 'S', 'A', 'C', 'K', 'P', 'T'};

template <typename T>
void put_le(std::string& out, T value) {
  static_assert(std::is_integral_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T get_le(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw Error("checkpoint truncated");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  pos += sizeof(T);
  return static_cast<T>(v);
}

std::vector<std::vector<std::size_t>> expected_shapes(std::size_t dim, std::size_t vocab) {
  return {{vocab, dim}, {vocab, dim}, {vocab, dim}, {dim, dim}, {kNumClasses, dim}, {kNumClasses}};
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                     const Vocabulary& vocab) {
  if (params.vocab_size() != vocab.size()) {
    throw Error("save_checkpoint: parameter rows do not match the vocabulary");
  }
  std::string out(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.dim()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(vocab.size()));
  put_le<std::uint64_t>(out, vocab.hash());
  for (const auto* t : params.tensors()) {
    for (double x : t->values()) {
      put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
    }
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(fmt::format("cannot write {}", path.string()));
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

ModelParams load_checkpoint(const std::filesystem::path& path, const Vocabulary& vocab) {
  const std::string in = read_file(path);
  if (in.size() < sizeof(kMagic) || std::memcmp(in.data(), kMagic, sizeof(kMagic)) != 0) {
    throw Error(fmt::format("{}: not a checkpoint", path.string()));
  }
  std::size_t pos = sizeof(kMagic);
  const auto version = get_le<std::uint32_t>(in, pos);
  if (version != kCheckpointVersion) {
    throw Error(fmt::format("{}: unsupported checkpoint version {}", path.string(), version));
  }
  const auto dim = get_le<std::uint32_t>(in, pos);
  const auto vocab_size = get_le<std::uint32_t>(in, pos);
  const auto hash = get_le<std::uint64_t>(in, pos);
  if (hash != vocab.hash() || vocab_size != vocab.size()) {
    throw Error(fmt::format("{}: vocabulary hash mismatch (checkpoint {}, vocabulary {})",
                            path.string(), hex64(hash), hex64(vocab.hash())));
  }
  if (dim == 0) throw Error(fmt::format("{}: zero dimension", path.string()));
  ModelParams params;
  auto tensors = params.tensors();
  const auto shapes = expected_shapes(dim, vocab_size);
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    Tensor t(shapes[i]);
    for (auto& x : t.values()) {
      x = static_cast<double>(std::bit_cast<float>(get_le<std::uint32_t>(in, pos)));
    }
    *tensors[i] = std::move(t);
  }
  if (pos != in.size()) throw Error(fmt::format("{}: trailing bytes in checkpoint", path.string()));
  return params;
}

}  // namespace pssa
