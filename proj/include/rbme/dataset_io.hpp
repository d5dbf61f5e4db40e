#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rbme/model.hpp"

namespace rbme {

// Binary container, all integers and doubles little-endian:
//   "RBME" | version u8 | N u64 | n u64 | d u64
//   data f64[N*n*d] | clean f64[N*n*d]
//   good_user bits[N] | sample_clean_flag bits[N*n]   (LSB-first, each padded to a byte)
//   target_mean f64[d] | user_means f64[N*d] | seed u64
inline constexpr unsigned char kDatasetVersion = 1;

void write_dataset(std::ostream& out, const BatchDataset& ds);
BatchDataset read_dataset(std::istream& in);
void save_dataset(const std::string& path, const BatchDataset& ds);
BatchDataset load_dataset(const std::string& path);

/// Observed data only: "user,sample,x0,...,x{d-1}".
void write_dataset_csv(std::ostream& out, const BatchDataset& ds);

/// Plain vectors, one per line, comma separated, no header.
void write_vectors_csv(std::ostream& out, const std::vector<double>& points, std::size_t d);
/// Returns the row-major values and sets d.
std::vector<double> read_vectors_csv(std::istream& in, std::size_t& d);

}  // namespace rbme
