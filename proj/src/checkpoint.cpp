#include "chi/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace chi {

namespace {

constexpr char kMagic[4] = {'C', 'H', 'I', 'C'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f64(std::ostream& os, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

double read_f64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double x;
  std::memcpy(&x, &bits, 8);
  return x;
}

}  // namespace

std::size_t Tensor::count() const {
  std::size_t n = 1;
  for (std::uint32_t d : dims) n *= d;
  return dims.empty() ? 0 : n;
}

void save_checkpoint(const std::string& path, const std::vector<Tensor>& tensors) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path);
  os.write(kMagic, 4);
  write_u32(os, kVersion);
  write_u32(os, static_cast<std::uint32_t>(tensors.size()));
  for (const Tensor& t : tensors) {
    write_u32(os, static_cast<std::uint32_t>(t.dims.size()));
    for (std::uint32_t d : t.dims) write_u32(os, d);
  }
  for (const Tensor& t : tensors) {
    if (t.data.size() != t.count())
      throw std::runtime_error("save_checkpoint: tensor data does not match dims");
    for (double x : t.data) write_f64(os, x);
  }
  if (!os) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

std::vector<Tensor> load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("load_checkpoint: bad magic in " + path);
  std::uint32_t version = read_u32(is);
  if (version != kVersion) throw std::runtime_error("load_checkpoint: unsupported version");
  std::uint32_t n = read_u32(is);
  std::vector<Tensor> tensors(n);
  for (Tensor& t : tensors) {
    std::uint32_t rank = read_u32(is);
    t.dims.resize(rank);
    for (std::uint32_t& d : t.dims) d = read_u32(is);
  }
  for (Tensor& t : tensors) {
    t.data.resize(t.count());
    for (double& x : t.data) x = read_f64(is);
  }
  if (!is) throw std::runtime_error("load_checkpoint: truncated file " + path);
  return tensors;
}

std::vector<Tensor> mlp_to_tensors(const MlpParams& p) {
  std::vector<Tensor> out;
  for (const auto& l : p.layers) {
    Tensor w;
    w.dims = {static_cast<std::uint32_t>(l.w.rows), static_cast<std::uint32_t>(l.w.cols)};
    w.data = l.w.data;
    out.push_back(std::move(w));
    Tensor b;
    b.dims = {static_cast<std::uint32_t>(l.b.size())};
    b.data = l.b;
    out.push_back(std::move(b));
  }
  return out;
}

MlpParams mlp_from_tensors(const std::vector<Tensor>& tensors, std::size_t& cursor, int n_layers) {
  MlpParams p;
  for (int li = 0; li < n_layers; ++li) {
    if (cursor + 2 > tensors.size())
      throw std::runtime_error("mlp_from_tensors: not enough tensors");
    const Tensor& w = tensors[cursor];
    const Tensor& b = tensors[cursor + 1];
    if (w.dims.size() != 2 || b.dims.size() != 1 || b.dims[0] != w.dims[0])
      throw std::runtime_error("mlp_from_tensors: malformed layer record");
    LinearLayer l;
    l.w = Matrix(static_cast<int>(w.dims[0]), static_cast<int>(w.dims[1]));
    l.w.data = w.data;
    l.b = b.data;
    if (!p.layers.empty() && p.layers.back().w.rows != l.w.cols)
      throw std::runtime_error("mlp_from_tensors: layer dims do not chain");
    p.layers.push_back(std::move(l));
    cursor += 2;
  }
  return p;
}

}  // namespace chi
