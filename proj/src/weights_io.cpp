#include "oba/weights_io.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include "oba/binio.hpp"

namespace oba {

namespace binio {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(FormatError::Kind::Io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(FormatError::Kind::Io, "cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError(FormatError::Kind::Io, "write failed for '" + path.string() + "'");
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace binio

namespace {
constexpr std::string_view kWeightsMagic = "OBAWT001";
}

std::string encode_weights(const std::vector<NamedTensor>& entries) {
  binio::Writer w;
  w.bytes(kWeightsMagic);
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(entries.size()));
  for (const auto& e : entries) {
    if (e.name.size() > std::numeric_limits<std::uint16_t>::max()) throw ArgumentError("weight name too long: " + e.name);
    if (e.tensor.rank() > 255) throw ArgumentError("tensor rank too large for OBAWT001: " + e.name);
    w.uint<std::uint16_t>(static_cast<std::uint16_t>(e.name.size()));
    w.bytes(e.name);
    w.uint<std::uint8_t>(static_cast<std::uint8_t>(e.tensor.rank()));
    for (Index d : e.tensor.shape()) w.uint<std::uint32_t>(static_cast<std::uint32_t>(d));
    for (Index i = 0; i < e.tensor.size(); ++i) w.f64(e.tensor[i]);
  }
  return w.take();
}

std::vector<NamedTensor> decode_weights(std::string_view bytes) {
  if (bytes.size() < kWeightsMagic.size() || bytes.substr(0, kWeightsMagic.size()) != kWeightsMagic) {
    if (bytes.size() >= 5 && bytes.substr(0, 5) == "OBAWT")
      throw FormatError(FormatError::Kind::VersionMismatch, "unsupported weight file version '" + std::string(bytes.substr(0, 8)) + "'");
    throw FormatError(FormatError::Kind::BadMagic, "bad magic: not an OBAWT001 weight file");
  }
  binio::Reader r(bytes.substr(kWeightsMagic.size()));
  const auto count = r.uint<std::uint32_t>();
  std::vector<NamedTensor> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor e;
    const auto len = r.uint<std::uint16_t>();
    e.name = std::string(r.bytes(len));
    const auto rank = r.uint<std::uint8_t>();
    Shape shape(rank);
    for (auto& d : shape) d = r.uint<std::uint32_t>();
    const Index n = shape_size(shape);
    if (static_cast<std::size_t>(n) > r.remaining() / 8)
      throw FormatError(FormatError::Kind::Truncated, "truncated payload in tensor '" + e.name + "'");
    Vector<double> v(n);
    for (Index k = 0; k < n; ++k) v[k] = r.f64();
    e.tensor = Tensord(std::move(shape), std::move(v));
    out.push_back(std::move(e));
  }
  if (r.remaining() != 0) throw FormatError(FormatError::Kind::ShapeInconsistency, "trailing bytes after last weight entry");
  return out;
}

void write_weights(const std::filesystem::path& path, const std::vector<NamedTensor>& entries) {
  binio::write_file(path, encode_weights(entries));
}

std::vector<NamedTensor> read_weights(const std::filesystem::path& path) { return decode_weights(binio::read_file(path)); }

}  // namespace oba
