#include <doctest.h>

#include <sstream>

#include "rbme/dataset_io.hpp"
#include "rbme/errors.hpp"
#include "rbme/harness.hpp"
#include "rbme/numfmt.hpp"

using namespace rbme;

TEST_CASE("binary container round-trips every field") {
  ExperimentConfig cfg;
  const BatchDataset ds = make_trial_dataset(cfg, {3, 7, 11, 0.2, 0.15, Variant::two_level, Adversary::cluster}, 1);
  std::stringstream buf;
  write_dataset(buf, ds);
  const std::string bytes = buf.str();
  CHECK(bytes.substr(0, 4) == "RBME");
  CHECK(static_cast<unsigned char>(bytes[4]) == kDatasetVersion);

  const BatchDataset back = read_dataset(buf);
  CHECK(back.N == 11);
  CHECK(back.n == 7);
  CHECK(back.d == 3);
  CHECK(back.data == ds.data);
  CHECK(back.clean == ds.clean);
  CHECK(back.good_user == ds.good_user);
  CHECK(back.sample_clean_flag == ds.sample_clean_flag);
  CHECK(back.user_means == ds.user_means);
  CHECK(back.target_mean == ds.target_mean);
  CHECK(back.seed == ds.seed);
}

TEST_CASE("corrupt containers are rejected") {
  std::stringstream bad("XXXX");
  CHECK_THROWS_AS(read_dataset(bad), IoError);

  ExperimentConfig cfg;
  const BatchDataset ds = make_trial_dataset(cfg, {2, 2, 2, 0.0, 0.0, Variant::two_level, Adversary::mean_pull}, 2);
  std::stringstream buf;
  write_dataset(buf, ds);
  std::stringstream cut(buf.str().substr(0, buf.str().size() / 2));
  CHECK_THROWS_AS(read_dataset(cut), IoError);
  CHECK_THROWS_AS(load_dataset("/nonexistent/file.rbme"), IoError);
}

TEST_CASE("vector csv round-trip") {
  const std::vector<double> pts{0.1, -2.5, 1e-300, 3.0, 4.0, 5.0};
  std::stringstream buf;
  write_vectors_csv(buf, pts, 2);
  std::size_t d = 0;
  CHECK(read_vectors_csv(buf, d) == pts);
  CHECK(d == 2);
}

TEST_CASE("number formatting is locale-free and shortest round-trip") {
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(1e21).find(',') == std::string::npos);
  CHECK(parse_double(format_double(0.1 + 0.2)) == 0.1 + 0.2);
  CHECK(parse_double(" 2.5 ") == 2.5);
  CHECK_THROWS_AS(parse_double("2,5"), ParameterError);
  CHECK_THROWS_AS(parse_double(""), ParameterError);
}
