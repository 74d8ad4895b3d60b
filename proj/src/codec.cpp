#include "ksalsa/codec.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ksalsa/errors.hpp"

namespace ksalsa {
namespace {

constexpr char kMagic[4] = {'K', 'S', 'T', 'N'};

template <typename T>
void put_le(std::string& out, T value) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
  }
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    if (remaining() < sizeof(U)) {
      throw CorruptionError(std::string("KSTN truncated while reading ") + what);
    }
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      bits |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return std::bit_cast<T>(bits);
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 4;
};

}  // namespace

std::string encode_tensor(const Tensor& tensor, DType dtype) {
  if (tensor.empty()) throw ArgumentError("cannot encode an empty tensor");
  std::string out(kMagic, 4);
  put_le<std::uint32_t>(out, kKstnVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dtype));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(tensor.rank()));
  for (std::size_t d : tensor.dims()) put_le<std::uint64_t>(out, d);
  const std::size_t width = dtype == DType::kF64 ? 8 : 4;
  out.reserve(out.size() + width * tensor.size());
  for (double v : tensor.values()) {
    if (dtype == DType::kF64) {
      put_le<double>(out, v);
    } else {
      put_le<float>(out, static_cast<float>(v));
    }
  }
  return out;
}

Tensor decode_tensor(const std::string& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError("not a KSTN file (bad magic)");
  }
  Reader in(bytes);
  const auto version = in.get<std::uint32_t>("version");
  if (version != kKstnVersion) {
    throw FormatError("unsupported KSTN version " + std::to_string(version));
  }
  const auto code = in.get<std::uint32_t>("dtype");
  if (code != 1 && code != 2) throw FormatError("unknown KSTN dtype code " + std::to_string(code));
  const auto dtype = static_cast<DType>(code);
  const auto ndim = in.get<std::uint32_t>("ndim");
  if (ndim == 0) throw CorruptionError("KSTN tensor has zero dimensions");
  Tensor::Dims dims(ndim);
  std::uint64_t count = 1;
  for (auto& d : dims) {
    const auto v = in.get<std::uint64_t>("dims");
    if (v == 0) throw CorruptionError("KSTN dimension of size zero");
    if (count > (std::uint64_t{1} << 40) / v) throw CorruptionError("KSTN dims overflow");
    count *= v;
    d = static_cast<std::size_t>(v);
  }
  const std::size_t width = dtype == DType::kF64 ? 8 : 4;
  if (in.remaining() != count * width) {
    throw CorruptionError("KSTN payload has " + std::to_string(in.remaining()) +
                          " bytes, dims " + dims_to_string(dims) + " need " +
                          std::to_string(count * width));
  }
  std::vector<double> data(count);
  for (auto& v : data) {
    v = dtype == DType::kF64 ? in.get<double>("payload")
                             : static_cast<double>(in.get<float>("payload"));
  }
  return Tensor(std::move(dims), std::move(data));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("short write to " + path.string());
}

void save_tensor(const std::filesystem::path& path, const Tensor& tensor, DType dtype) {
  write_file(path, encode_tensor(tensor, dtype));
}

Tensor load_tensor(const std::filesystem::path& path) {
  return decode_tensor(read_file(path));
}

}  // namespace ksalsa
