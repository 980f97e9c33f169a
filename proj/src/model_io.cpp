#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "salfuse/error.hpp"
#include "salfuse/fusion.hpp"

namespace salfuse {

namespace {

constexpr std::array<char, 4> kMagic{'S', 'F', 'N', '1'};

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_f64(std::vector<unsigned char>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(bits >> (8 * i)));
}

class Reader {
 public:
  Reader(const std::vector<unsigned char>& bytes, std::string origin)
      : bytes_(bytes), origin_(std::move(origin)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
    return std::bit_cast<double>(v);
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) {
    if (pos_ + n > bytes_.size()) {
      throw Error(Errc::corrupt_data, "truncated model file " + origin_);
    }
  }

  const std::vector<unsigned char>& bytes_;
  std::string origin_;
  std::size_t pos_ = 4;  // past the magic
};

}  // namespace

void save_model(const FusionParams& params, const std::filesystem::path& path) {
  std::vector<unsigned char> out(kMagic.begin(), kMagic.end());
  put_u32(out, params.arch.k1);
  put_u32(out, params.arch.hidden);
  put_u32(out, params.arch.k2);
  for (double v : params.conv1.weights) put_f64(out, v);
  for (double v : params.conv1.bias) put_f64(out, v);
  for (double v : params.conv2.weights) put_f64(out, v);
  for (double v : params.conv2.bias) put_f64(out, v);

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error(Errc::io_write_failure, "cannot write " + path.string());
}

FusionParams load_model(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::file_not_found, "cannot open model " + path.string());
  const std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(f),
                                         std::istreambuf_iterator<char>()};
  if (bytes.size() < 4 || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw Error(Errc::unsupported_format, "not an SFN1 model file: " + path.string());
  }
  Reader in(bytes, path.string());
  FusionArch arch;
  arch.k1 = in.u32();
  arch.hidden = in.u32();
  arch.k2 = in.u32();
  if (arch.k1 % 2 == 0 || arch.k2 % 2 == 0 || arch.hidden == 0 || arch.k1 > 63 ||
      arch.k2 > 63 || arch.hidden > 4096) {
    throw Error(Errc::corrupt_data, "implausible architecture in " + path.string());
  }
  FusionParams p = FusionParams::zeros(arch);
  for (double& v : p.conv1.weights) v = in.f64();
  for (double& v : p.conv1.bias) v = in.f64();
  for (double& v : p.conv2.weights) v = in.f64();
  for (double& v : p.conv2.bias) v = in.f64();
  if (!in.at_end()) {
    throw Error(Errc::corrupt_data, "trailing bytes in model file " + path.string());
  }
  return p;
}

}  // namespace salfuse
