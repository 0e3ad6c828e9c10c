#include "trec/tensor_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace trec {

namespace {

static_assert(std::endian::native == std::endian::little,
              "DTNS writer assumes a little-endian host");

constexpr char kMagic[8] = {'D', 'T', 'N', 'S', '0', '0', '0', '1'};

template <typename T>
void write_raw(std::ofstream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("DTNS: truncated file");
  return v;
}

}  // namespace

void save_dtns(const DenseTensor& t, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("DTNS: cannot open " + path + " for writing");
  os.write(kMagic, sizeof(kMagic));
  write_raw(os, static_cast<std::uint32_t>(t.order()));
  for (Index n : t.dims()) write_raw(os, static_cast<std::uint64_t>(n));
  os.write(reinterpret_cast<const char*>(t.data()),
           static_cast<std::streamsize>(sizeof(double) * t.size()));
  if (!os) throw std::runtime_error("DTNS: write failed for " + path);
}

DenseTensor load_dtns(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("DTNS: cannot open " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("DTNS: bad magic in " + path);
  const auto d = read_raw<std::uint32_t>(is);
  if (d < 2 || d > 64) throw std::runtime_error("DTNS: implausible order");
  std::vector<Index> dims(d);
  Index total = 1;
  for (auto& n : dims) {
    n = static_cast<Index>(read_raw<std::uint64_t>(is));
    if (n < 1) throw std::runtime_error("DTNS: nonpositive dimension");
    total *= n;
  }
  std::vector<double> values(total);
  is.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(sizeof(double) * total));
  if (!is) throw std::runtime_error("DTNS: truncated payload in " + path);
  return DenseTensor(std::move(dims), std::move(values));
}

DenseTensor load_tensor_text(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("tensor text: cannot open " + path);
  Index d;
  if (!(is >> d) || d < 2) throw std::runtime_error("tensor text: bad order");
  std::vector<Index> dims(d);
  Index total = 1;
  for (auto& n : dims) {
    if (!(is >> n) || n < 1) throw std::runtime_error("tensor text: bad dimension");
    total *= n;
  }
  std::vector<double> values(total);
  for (auto& x : values)
    if (!(is >> x)) throw std::runtime_error("tensor text: too few values");
  return DenseTensor(std::move(dims), std::move(values));
}

}  // namespace trec
