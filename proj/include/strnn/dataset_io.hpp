#pragma once

#include "strnn/path.hpp"

#include <string>
#include <utility>
#include <vector>

namespace strnn::paths {

// CSV schema: optional '#' comment lines, then a header
//   path_id,t,x_1,..,x_r,label
// followed by one row per sample, grouped by path_id in file order. Doubles
// are printed with 17 significant digits so a save/load round trip is exact.
void save_dataset_csv(const LabeledDataset& d, const std::string& file,
                      const std::string& comment = "");
LabeledDataset load_dataset_csv(const std::string& file);

// One block per utterance: consecutive lines of 12 whitespace-separated
// reals, blocks separated by blank lines.
std::vector<Matrix> read_ae_blocks(const std::string& file);

// Utterance counts per speaker, in file order, for the two UCI files.
extern const std::vector<int> kVowelsTrainBlocks;  // 9 x 30
extern const std::vector<int> kVowelsTestBlocks;   // 31,35,88,44,29,24,40,50,29

// Keeps speakers 1 and 2 (labels -1 and +1), reparametrises each utterance
// to times k/(L-1) on [0,1]. Block counts are per-speaker utterance counts
// in file order; defaults match the published ae.train / ae.test files.
std::pair<LabeledDataset, LabeledDataset> load_japanese_vowels(
    const std::string& train_file, const std::string& test_file,
    const std::vector<int>& train_blocks = kVowelsTrainBlocks,
    const std::vector<int>& test_blocks = kVowelsTestBlocks);

}  // namespace strnn::paths
