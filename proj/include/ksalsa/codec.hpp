#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "ksalsa/tensor.hpp"

namespace ksalsa {

// KSTN tensor files:
//   magic "KSTN" | version u32 | dtype u32 (1=f64, 2=f32) | ndim u32 |
//   dims u64[ndim] | payload, row-major
// All integers and floats are little-endian.
enum class DType : std::uint32_t { kF64 = 1, kF32 = 2 };

inline constexpr std::uint32_t kKstnVersion = 1;

std::string encode_tensor(const Tensor& tensor, DType dtype = DType::kF64);
Tensor decode_tensor(const std::string& bytes);

void save_tensor(const std::filesystem::path& path, const Tensor& tensor,
                 DType dtype = DType::kF64);
Tensor load_tensor(const std::filesystem::path& path);

// Shared by writers that must be byte-stable (manifests, journals).
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace ksalsa
