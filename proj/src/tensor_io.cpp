#include "veracity/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <numeric>

namespace veracity {
namespace {

constexpr char kMagic[8] = {'F', 'R', 'T', 'E', 'N', 'S', 'O', 'R'};
constexpr std::size_t kMaxRank = 16;

static_assert(std::endian::native == std::endian::little, "tensor codec assumes a little-endian host");

std::size_t header_size(std::size_t rank) { return sizeof(kMagic) + 2 + 4 * rank; }

void put_u32(std::uint8_t* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

// Parses the fixed header; returns the byte offset of the payload.
std::size_t parse_header(const std::uint8_t* data, std::size_t size, const std::string& origin, TensorHeader& header) {
  using Kind = TensorFormatError::Kind;
  if (size < sizeof(kMagic) || std::memcmp(data, kMagic, sizeof(kMagic)) != 0) {
    throw TensorFormatError(Kind::bad_magic, origin + ": bad magic (not an FRTENSOR file)");
  }
  if (size < sizeof(kMagic) + 2) {
    throw TensorFormatError(Kind::truncated, origin + ": truncated header");
  }
  const std::uint8_t dtype = data[8];
  if (dtype != static_cast<std::uint8_t>(DType::f32) && dtype != static_cast<std::uint8_t>(DType::f64)) {
    throw TensorFormatError(Kind::unsupported_dtype, origin + ": unsupported dtype code " + std::to_string(dtype));
  }
  const std::size_t rank = data[9];
  if (rank == 0 || rank > kMaxRank) {
    throw TensorFormatError(Kind::bad_rank, origin + ": invalid rank " + std::to_string(rank));
  }
  if (size < header_size(rank)) {
    throw TensorFormatError(Kind::truncated, origin + ": truncated header");
  }
  header.dtype = static_cast<DType>(dtype);
  header.dims.resize(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    header.dims[i] = get_u32(data + 10 + 4 * i);
    if (header.dims[i] == 0) {
      throw TensorFormatError(Kind::bad_rank, origin + ": zero-sized dimension " + std::to_string(i));
    }
  }
  return header_size(rank);
}

std::size_t product(const std::vector<std::uint32_t>& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                         [](std::size_t a, std::uint32_t b) { return a * b; });
}

}  // namespace

std::size_t dtype_size(DType dtype) { return dtype == DType::f32 ? 4 : 8; }

TensorBlob::TensorBlob(std::vector<std::uint32_t> d, std::vector<double> v, DType t)
    : dtype(t), dims(std::move(d)), values(std::move(v)) {
  validate();
}

std::size_t TensorBlob::element_count() const { return product(dims); }

void TensorBlob::validate() const {
  if (dims.empty() || dims.size() > kMaxRank) throw std::invalid_argument("tensor rank must be in [1, 16]");
  for (auto d : dims) {
    if (d == 0) throw std::invalid_argument("tensor dims must be >= 1");
  }
  if (values.size() != element_count()) {
    throw std::invalid_argument("tensor payload length " + std::to_string(values.size()) +
                                " != product(dims) " + std::to_string(element_count()));
  }
}

std::vector<std::uint8_t> encode_tensor(const TensorBlob& blob) {
  blob.validate();
  std::vector<std::uint8_t> out(header_size(blob.rank()) + blob.values.size() * dtype_size(blob.dtype));
  std::memcpy(out.data(), kMagic, sizeof(kMagic));
  out[sizeof(kMagic)] = static_cast<std::uint8_t>(blob.dtype);
  out[sizeof(kMagic) + 1] = static_cast<std::uint8_t>(blob.rank());
  for (std::size_t i = 0; i < blob.rank(); ++i) put_u32(out.data() + sizeof(kMagic) + 2 + 4 * i, blob.dims[i]);
  const std::size_t base = header_size(blob.rank());
  std::uint8_t* p = out.data() + base;
  if (blob.dtype == DType::f32) {
    for (double v : blob.values) {
      const float f = static_cast<float>(v);
      std::memcpy(p, &f, 4);
      p += 4;
    }
  } else {
    std::memcpy(p, blob.values.data(), blob.values.size() * 8);
  }
  return out;
}

TensorBlob decode_tensor(const std::vector<std::uint8_t>& bytes, const std::string& origin) {
  using Kind = TensorFormatError::Kind;
  TensorHeader header;
  const std::size_t offset = parse_header(bytes.data(), bytes.size(), origin, header);
  const std::size_t n = product(header.dims);
  const std::size_t need = offset + n * dtype_size(header.dtype);
  if (bytes.size() < need) {
    throw TensorFormatError(Kind::truncated, origin + ": truncated payload (expected " + std::to_string(n) +
                                                 " values, file holds " +
                                                 std::to_string((bytes.size() - offset) / dtype_size(header.dtype)) + ")");
  }
  if (bytes.size() > need) {
    throw TensorFormatError(Kind::trailing_bytes, origin + ": " + std::to_string(bytes.size() - need) +
                                                      " trailing bytes after payload");
  }
  TensorBlob blob;
  blob.dtype = header.dtype;
  blob.dims = std::move(header.dims);
  blob.values.resize(n);
  const std::uint8_t* p = bytes.data() + offset;
  if (blob.dtype == DType::f32) {
    for (std::size_t i = 0; i < n; ++i, p += 4) {
      float f;
      std::memcpy(&f, p, 4);
      blob.values[i] = f;
    }
  } else {
    std::memcpy(blob.values.data(), p, n * 8);
  }
  return blob;
}

TensorBlob read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw TensorFormatError(TensorFormatError::Kind::io, path.string() + ": cannot open for reading");
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_tensor(bytes, path.string());
}

void write_tensor(const TensorBlob& blob, const std::filesystem::path& path) {
  const auto bytes = encode_tensor(blob);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw TensorFormatError(TensorFormatError::Kind::io, path.string() + ": cannot open for writing");
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw TensorFormatError(TensorFormatError::Kind::io, path.string() + ": write failed");
  }
}

TensorHeader probe_tensor(const std::filesystem::path& path) {
  using Kind = TensorFormatError::Kind;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TensorFormatError(Kind::io, path.string() + ": cannot open for reading");
  std::vector<std::uint8_t> head(header_size(kMaxRank));
  in.read(reinterpret_cast<char*>(head.data()), static_cast<std::streamsize>(head.size()));
  head.resize(static_cast<std::size_t>(in.gcount()));
  TensorHeader header;
  const std::size_t offset = parse_header(head.data(), head.size(), path.string(), header);
  const auto file_size = std::filesystem::file_size(path);
  const std::size_t need = offset + product(header.dims) * dtype_size(header.dtype);
  if (file_size < need) throw TensorFormatError(Kind::truncated, path.string() + ": truncated payload");
  if (file_size > need) throw TensorFormatError(Kind::trailing_bytes, path.string() + ": trailing bytes after payload");
  return header;
}

}  // namespace veracity
