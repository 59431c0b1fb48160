#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ostd/corpus.h"
#include "ostd/label.h"
#include "ostd/labeling.h"
#include "ostd/matrix.h"
#include "ostd/rng.h"

namespace ostd::fixtures {

std::vector<TokenId> random_tokens(Rng& rng, std::size_t n, std::uint32_t alphabet, TokenId min_id = 0);

// Balanced dataset with columns gen_logp, pr_logp, pr_ng_3, gen_ng_2.
// gen_logp, pr_logp and pr_ng_3 come in exact hallucinated/faithful twins:
// every value is shared by one record of each class, so any interval of a
// twinned column holds equally many records of both classes. With a balanced
// dataset the train-majority of an interval is the test-minority, and a tree
// on gen_logp alone cannot beat 0.5 test accuracy.
// gen_ng_2 puts 80% of the hallucinated records in the band [-1.7, -1.4];
// everything else lies in [-4, -2] or [-1.1, 0].
LabeledDataset narrow_band(std::size_t per_class, std::uint64_t seed);

struct ConsistencyFixture {
  Matrix train_x;
  std::vector<Label> train_y;
  Matrix test_x;
  std::vector<Label> test_y;
};

// One feature; class 0 in [0, 1], class 1 in [10, 11].
ConsistencyFixture wide_margin(std::uint64_t seed, std::size_t train_per_class = 30,
                               std::size_t test_per_class = 10);

// wide_margin with the labels of the first round(flip_fraction * n) training
// rows of a fixed random order flipped, so higher levels flip supersets.
ConsistencyFixture label_noise(double flip_fraction, std::uint64_t seed);

// Feature CSV (header id + feature names) and labels JSON-lines for CLI runs.
void write_dataset(const LabeledDataset& ds, const std::filesystem::path& features_csv,
                   const std::filesystem::path& labels_jsonl);

// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& tag);

}  // namespace ostd::fixtures
