#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace veracity {

// On-disk layout (all little-endian):
//   8 bytes  magic "FRTENSOR"
//   u8       dtype code
//   u8       rank
//   u32 x rank dims
//   payload, row-major
enum class DType : std::uint8_t { f32 = 0, f64 = 1 };

std::size_t dtype_size(DType dtype);

class TensorFormatError : public std::runtime_error {
 public:
  enum class Kind { io, bad_magic, unsupported_dtype, bad_rank, truncated, trailing_bytes };

  TensorFormatError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Dense array with a shape header. Values are held as double; an f32 blob
// only ever holds values exactly representable as float.
struct TensorBlob {
  DType dtype = DType::f32;
  std::vector<std::uint32_t> dims;
  std::vector<double> values;

  TensorBlob() = default;
  TensorBlob(std::vector<std::uint32_t> dims, std::vector<double> values, DType dtype = DType::f32);

  std::size_t rank() const { return dims.size(); }
  std::size_t element_count() const;

  // Throws std::invalid_argument when dims/payload disagree.
  void validate() const;

  bool operator==(const TensorBlob&) const = default;
};

struct TensorHeader {
  DType dtype;
  std::vector<std::uint32_t> dims;
};

std::vector<std::uint8_t> encode_tensor(const TensorBlob& blob);
TensorBlob decode_tensor(const std::vector<std::uint8_t>& bytes, const std::string& origin = "<memory>");

TensorBlob read_tensor(const std::filesystem::path& path);
void write_tensor(const TensorBlob& blob, const std::filesystem::path& path);

// Reads and checks only the header; also verifies the file is long enough
// for the payload the header declares.
TensorHeader probe_tensor(const std::filesystem::path& path);

}  // namespace veracity
