#include "fixtures.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <unistd.h>

#include "ostd/dataset_io.h"

namespace ostd::fixtures {

std::vector<TokenId> random_tokens(Rng& rng, std::size_t n, std::uint32_t alphabet, TokenId min_id) {
  std::vector<TokenId> out(n);
  for (auto& t : out) t = min_id + static_cast<TokenId>(rng.uniform_below(alphabet - min_id));
  return out;
}

namespace {

// Uniform draw from [-4, -2] u [-1.1, 0], proportional to length.
double outside_band(Rng& rng) {
  const double u = rng.uniform(0.0, 3.1);
  return u < 2.0 ? -4.0 + u : -1.1 + (u - 2.0);
}

}  // namespace

LabeledDataset narrow_band(std::size_t per_class, std::uint64_t seed) {
  Rng rng(seed);
  LabeledDataset ds;
  ds.feature_names = {"gen_logp", "pr_logp", "pr_ng_3", "gen_ng_2"};
  const auto in_band = static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(per_class)));
  for (std::size_t i = 0; i < per_class; ++i) {
    const double gen_logp = rng.uniform(-3.0, -0.1);
    const double pr_logp = rng.uniform(-6.0, -1.0);
    const double pr_ng = rng.uniform(-12.0, 0.0);
    const double band = i < in_band ? rng.uniform(-1.7, -1.4) : outside_band(rng);
    const double faithful_gen = outside_band(rng);
    ds.records.push_back({"h" + std::to_string(i), {gen_logp, pr_logp, pr_ng, band}, Label::kHallucinated, 5});
    ds.records.push_back({"f" + std::to_string(i), {gen_logp, pr_logp, pr_ng, faithful_gen}, Label::kFaithful, 5});
  }
  return ds;
}

ConsistencyFixture wide_margin(std::uint64_t seed, std::size_t train_per_class, std::size_t test_per_class) {
  Rng rng(seed);
  ConsistencyFixture f;
  f.train_x = Matrix(2 * train_per_class, 1);
  f.test_x = Matrix(2 * test_per_class, 1);
  for (std::size_t i = 0; i < 2 * train_per_class; ++i) {
    const bool faithful = i % 2 == 1;
    f.train_x(i, 0) = (faithful ? 10.0 : 0.0) + rng.uniform01();
    f.train_y.push_back(faithful ? Label::kFaithful : Label::kHallucinated);
  }
  for (std::size_t i = 0; i < 2 * test_per_class; ++i) {
    const bool faithful = i % 2 == 1;
    f.test_x(i, 0) = (faithful ? 10.0 : 0.0) + rng.uniform01();
    f.test_y.push_back(faithful ? Label::kFaithful : Label::kHallucinated);
  }
  return f;
}

ConsistencyFixture label_noise(double flip_fraction, std::uint64_t seed) {
  auto f = wide_margin(seed);
  std::vector<std::size_t> order(f.train_y.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed ^ 0x5eedULL);
  rng.shuffle(std::span<std::size_t>(order));
  const auto flips = static_cast<std::size_t>(std::llround(flip_fraction * static_cast<double>(order.size())));
  for (std::size_t k = 0; k < flips; ++k) {
    auto& y = f.train_y[order[k]];
    y = y == Label::kFaithful ? Label::kHallucinated : Label::kFaithful;
  }
  return f;
}

void write_dataset(const LabeledDataset& ds, const std::filesystem::path& features_csv,
                   const std::filesystem::path& labels_jsonl) {
  std::ofstream csv(features_csv);
  csv << "id";
  for (const auto& n : ds.feature_names) csv << ',' << n;
  csv << '\n';
  char buf[32];
  for (const auto& r : ds.records) {
    csv << r.id;
    for (double v : r.features) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      csv << ',' << buf;
    }
    csv << '\n';
  }
  std::vector<LabelRow> labels;
  for (const auto& r : ds.records) labels.push_back({r.id, r.label, ds.criterion, std::nullopt});
  write_labels(labels_jsonl, labels);
}

std::filesystem::path temp_dir(const std::string& tag) {
  static std::uint64_t counter = 0;
  const auto dir = std::filesystem::temp_directory_path() /
                   ("ostd-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace ostd::fixtures
