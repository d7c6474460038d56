#ifndef OBA_WEIGHTS_IO_HPP
#define OBA_WEIGHTS_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "oba/tensor.hpp"

namespace oba {

struct NamedTensor {
  std::string name;
  Tensord tensor;

  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

/// OBAWT001: magic, u32 entry count, then per entry u16 name length + UTF-8
/// name, u8 rank, rank x u32 dims, product(dims) float64 values (all LE).
std::string encode_weights(const std::vector<NamedTensor>& entries);
std::vector<NamedTensor> decode_weights(std::string_view bytes);

void write_weights(const std::filesystem::path& path, const std::vector<NamedTensor>& entries);
std::vector<NamedTensor> read_weights(const std::filesystem::path& path);

}  // namespace oba

#endif  // OBA_WEIGHTS_IO_HPP
