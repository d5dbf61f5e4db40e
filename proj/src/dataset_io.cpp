#include "rbme/dataset_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "rbme/errors.hpp"
#include "rbme/numfmt.hpp"

namespace rbme {

namespace {

static_assert(std::endian::native == std::endian::little, "dataset container assumes a little-endian host");

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int b = 0; b < 8; ++b) buf[b] = static_cast<unsigned char>(v >> (8 * b));
  out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char buf[8];
  if (!in.read(reinterpret_cast<char*>(buf), 8)) throw IoError("dataset: truncated header");
  std::uint64_t v = 0;
  for (int b = 7; b >= 0; --b) v = (v << 8) | buf[b];
  return v;
}

void put_doubles(std::ostream& out, const std::vector<double>& values) {
  out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
}

void get_doubles(std::istream& in, std::vector<double>& values, std::size_t count) {
  values.resize(count);
  if (!in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(count * sizeof(double))))
    throw IoError("dataset: truncated payload");
}

void put_bits(std::ostream& out, const std::vector<std::uint8_t>& flags) {
  std::vector<unsigned char> packed((flags.size() + 7) / 8, 0);
  for (std::size_t k = 0; k < flags.size(); ++k)
    if (flags[k]) packed[k / 8] |= static_cast<unsigned char>(1u << (k % 8));
  out.write(reinterpret_cast<const char*>(packed.data()), static_cast<std::streamsize>(packed.size()));
}

void get_bits(std::istream& in, std::vector<std::uint8_t>& flags, std::size_t count) {
  std::vector<unsigned char> packed((count + 7) / 8);
  if (!in.read(reinterpret_cast<char*>(packed.data()), static_cast<std::streamsize>(packed.size())))
    throw IoError("dataset: truncated flags");
  flags.resize(count);
  for (std::size_t k = 0; k < count; ++k) flags[k] = (packed[k / 8] >> (k % 8)) & 1u;
}

}  // namespace

void write_dataset(std::ostream& out, const BatchDataset& ds) {
  out.write("RBME", 4);
  out.put(static_cast<char>(kDatasetVersion));
  put_u64(out, ds.N);
  put_u64(out, ds.n);
  put_u64(out, ds.d);
  put_doubles(out, ds.data);
  put_doubles(out, ds.clean);
  put_bits(out, ds.good_user);
  put_bits(out, ds.sample_clean_flag);
  put_doubles(out, ds.target_mean);
  put_doubles(out, ds.user_means);
  put_u64(out, ds.seed);
  if (!out) throw IoError("dataset: write failed");
}

BatchDataset read_dataset(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "RBME", 4) != 0) throw IoError("dataset: bad magic");
  const int version = in.get();
  if (version != kDatasetVersion) throw IoError("dataset: unsupported version " + std::to_string(version));
  BatchDataset ds;
  ds.N = get_u64(in);
  ds.n = get_u64(in);
  ds.d = get_u64(in);
  if (ds.N == 0 || ds.n == 0 || ds.d == 0) throw IoError("dataset: zero extent in header");
  if (ds.N > (1ULL << 32) || ds.n > (1ULL << 32) || ds.d > (1ULL << 32) || ds.N * ds.n > (1ULL << 34) ||
      ds.N * ds.n * ds.d > (1ULL << 34))
    throw IoError("dataset: implausible extents in header");
  const std::size_t cells = ds.N * ds.n * ds.d;
  get_doubles(in, ds.data, cells);
  get_doubles(in, ds.clean, cells);
  get_bits(in, ds.good_user, ds.N);
  get_bits(in, ds.sample_clean_flag, ds.N * ds.n);
  get_doubles(in, ds.target_mean, ds.d);
  get_doubles(in, ds.user_means, ds.N * ds.d);
  ds.seed = get_u64(in);
  return ds;
}

void save_dataset(const std::string& path, const BatchDataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  write_dataset(out, ds);
}

BatchDataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  return read_dataset(in);
}

void write_dataset_csv(std::ostream& out, const BatchDataset& ds) {
  out << "user,sample";
  for (std::size_t c = 0; c < ds.d; ++c) out << ",x" << c;
  out << '\n';
  for (std::size_t i = 0; i < ds.N; ++i) {
    for (std::size_t j = 0; j < ds.n; ++j) {
      out << i << ',' << j;
      for (double x : ds.sample(i, j)) out << ',' << format_double(x);
      out << '\n';
    }
  }
}

void write_vectors_csv(std::ostream& out, const std::vector<double>& points, std::size_t d) {
  for (std::size_t k = 0; k < points.size(); ++k) {
    out << format_double(points[k]);
    out << ((k + 1) % d == 0 ? '\n' : ',');
  }
}

std::vector<double> read_vectors_csv(std::istream& in, std::size_t& d) {
  std::vector<double> values;
  d = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t count = 0;
    std::size_t start = 0;
    while (start <= line.size()) {
      const std::size_t comma = line.find(',', start);
      const std::string field = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      values.push_back(parse_double(field));
      ++count;
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (d == 0) d = count;
    if (count != d) throw IoError("vector csv: ragged rows");
  }
  if (d == 0) throw IoError("vector csv: no rows");
  return values;
}

}  // namespace rbme
