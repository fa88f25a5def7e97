#include "strnn/dataset_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace strnn::paths {

namespace {

constexpr int kVowelDim = 12;

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(std::string_view s, const std::string& file, int line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw FormatError(file + ":" + std::to_string(line_no) + ": bad number '" +
                      std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

bool is_blank(std::string_view s) {
  return s.find_first_not_of(" \t\r") == std::string_view::npos;
}

std::ifstream open_input(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open file: " + file);
  return in;
}

}  // namespace

void save_dataset_csv(const LabeledDataset& d, const std::string& file,
                      const std::string& comment) {
  d.validate();
  std::ofstream out(file);
  if (!out) throw IoError("cannot write file: " + file);
  if (!comment.empty()) {
    std::istringstream lines(comment);
    std::string line;
    while (std::getline(lines, line)) out << "# " << line << "\n";
  }
  out << "path_id,t";
  for (int j = 1; j <= d.dim(); ++j) out << ",x_" << j;
  out << ",label\n";
  for (int i = 0; i < d.size(); ++i) {
    const Path& p = d.paths[i];
    for (int k = 0; k < p.num_samples(); ++k) {
      out << i << ',' << fmt_double(p.times[k]);
      for (int j = 0; j < p.dim(); ++j) out << ',' << fmt_double(p.values(k, j));
      out << ',' << d.labels[i] << "\n";
    }
  }
  if (!out) throw IoError("write failed: " + file);
}

LabeledDataset load_dataset_csv(const std::string& file) {
  std::ifstream in = open_input(file);
  std::string line;
  int line_no = 0;
  int r = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto fields = split(line, ',');
    if (fields.size() < 4 || fields[0] != "path_id" || fields[1] != "t" ||
        fields.back() != "label")
      throw FormatError(file + ":" + std::to_string(line_no) + ": bad header");
    r = static_cast<int>(fields.size()) - 3;
    break;
  }
  if (r < 1) throw FormatError(file + ": missing header");

  LabeledDataset d;
  d.name = file;
  long cur_id = -1;
  std::vector<double> times;
  std::vector<double> vals;
  int cur_label = 0;
  auto flush = [&]() {
    if (cur_id < 0) return;
    Path p;
    p.times = times;
    p.values = Eigen::Map<Matrix>(vals.data(), r, static_cast<Eigen::Index>(times.size()))
                   .transpose();
    d.paths.push_back(std::move(p));
    d.labels.push_back(cur_label);
    times.clear();
    vals.clear();
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto fields = split(line, ',');
    if (static_cast<int>(fields.size()) != r + 3)
      throw FormatError(file + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(r + 3) + " fields, got " +
                        std::to_string(fields.size()));
    const long id = static_cast<long>(parse_double(fields[0], file, line_no));
    const double label_val = parse_double(fields.back(), file, line_no);
    if (label_val != 1.0 && label_val != -1.0)
      throw FormatError(file + ":" + std::to_string(line_no) + ": label must be -1 or 1");
    if (id != cur_id) {
      flush();
      cur_id = id;
      cur_label = static_cast<int>(label_val);
    } else if (static_cast<int>(label_val) != cur_label) {
      throw FormatError(file + ":" + std::to_string(line_no) +
                        ": label changes within one path");
    }
    times.push_back(parse_double(fields[1], file, line_no));
    for (int j = 0; j < r; ++j) vals.push_back(parse_double(fields[2 + j], file, line_no));
  }
  flush();
  d.validate();
  return d;
}

std::vector<Matrix> read_ae_blocks(const std::string& file) {
  std::ifstream in = open_input(file);
  std::vector<Matrix> blocks;
  std::vector<double> vals;
  int rows = 0;
  int line_no = 0;
  std::string line;
  auto flush = [&]() {
    if (rows == 0) return;
    blocks.push_back(
        Eigen::Map<Matrix>(vals.data(), kVowelDim, rows).transpose());
    vals.clear();
    rows = 0;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) {
      flush();
      continue;
    }
    std::istringstream fields(line);
    std::string tok;
    int count = 0;
    while (fields >> tok) {
      if (count >= kVowelDim)
        throw FormatError(file + ":" + std::to_string(line_no) + ": more than " +
                          std::to_string(kVowelDim) + " fields");
      vals.push_back(parse_double(tok, file, line_no));
      ++count;
    }
    if (count != kVowelDim)
      throw FormatError(file + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(kVowelDim) + " fields, got " + std::to_string(count));
    ++rows;
  }
  flush();
  return blocks;
}

const std::vector<int> kVowelsTrainBlocks = {30, 30, 30, 30, 30, 30, 30, 30, 30};
const std::vector<int> kVowelsTestBlocks = {31, 35, 88, 44, 29, 24, 40, 50, 29};

namespace {

LabeledDataset keep_two_speakers(const std::vector<Matrix>& blocks,
                                 const std::vector<int>& per_speaker,
                                 const std::string& file) {
  if (per_speaker.size() < 2)
    throw std::invalid_argument("load_japanese_vowels: need counts for >= 2 speakers");
  long total = 0;
  for (int c : per_speaker) total += c;
  if (static_cast<long>(blocks.size()) != total)
    throw FormatError(file + ": found " + std::to_string(blocks.size()) +
                      " utterances, expected " + std::to_string(total));

  LabeledDataset d;
  d.name = file;
  long offset = 0;
  for (int speaker = 0; speaker < 2; ++speaker) {
    const int label = speaker == 0 ? -1 : 1;
    for (int k = 0; k < per_speaker[speaker]; ++k) {
      const Matrix& block = blocks[offset + k];
      const int L = static_cast<int>(block.rows());
      if (L < 2)
        throw FormatError(file + ": utterance with fewer than 2 frames");
      Path p;
      p.times.resize(L);
      for (int i = 0; i < L; ++i) p.times[i] = static_cast<double>(i) / (L - 1);
      p.values = block;
      d.paths.push_back(std::move(p));
      d.labels.push_back(label);
    }
    offset += per_speaker[speaker];
  }
  d.validate();
  return d;
}

}  // namespace

std::pair<LabeledDataset, LabeledDataset> load_japanese_vowels(
    const std::string& train_file, const std::string& test_file,
    const std::vector<int>& train_blocks, const std::vector<int>& test_blocks) {
  LabeledDataset train = keep_two_speakers(read_ae_blocks(train_file), train_blocks, train_file);
  LabeledDataset test = keep_two_speakers(read_ae_blocks(test_file), test_blocks, test_file);
  return {std::move(train), std::move(test)};
}

}  // namespace strnn::paths
