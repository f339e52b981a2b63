#include "support.hpp"

#include <array>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

#include "hof/cli.hpp"
#include "hof/unicode.hpp"

namespace fs = std::filesystem;

namespace testing_support {

fs::path fixture(const std::string& name) {
  return fs::path(HOF_FIXTURE_DIR) / name;
}

TempDir::TempDir(const std::string& tag) {
  static int counter = 0;
  path_ = fs::temp_directory_path() /
          ("hof-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

namespace {

char32_t pick_range(hof::Rng& rng, char32_t lo, char32_t hi) {
  return lo + static_cast<char32_t>(rng.uniform_index(hi - lo + 1));
}

const std::array<const char*, 16> kPieces = {
    "https://t.co/", "http://", "www.", "example.com/", "@", "#", "_",
    "‍", "️", "⃣", "\U0001F468‍\U0001F469‍\U0001F467",
    "❤️", "1️⃣", "\U0001F44D\U0001F3FD", "\U0001F1E7\U0001F1E9",
    "\r\n"};

}  // namespace

std::string random_post(hof::Rng& rng, size_t max_pieces) {
  std::u32string text;
  const size_t pieces = rng.uniform_index(max_pieces + 1);
  for (size_t p = 0; p < pieces; ++p) {
    const size_t run = 1 + rng.uniform_index(6);
    switch (rng.uniform_index(12)) {
      case 0:
        for (size_t k = 0; k < run; ++k) text += pick_range(rng, 0x0980, 0x09FF);
        break;
      case 1:
        for (size_t k = 0; k < run; ++k) text += pick_range(rng, 0x0A80, 0x0AFF);
        break;
      case 2:
        for (size_t k = 0; k < run; ++k) text += pick_range(rng, 0x20, 0x7E);
        break;
      case 3:
        for (size_t k = 0; k < run; ++k) text += pick_range(rng, 0xA0, 0x24F);
        break;
      case 4:
        for (size_t k = 0; k < run; ++k) text += pick_range(rng, 0x0300, 0x036F);
        break;
      case 5:
        for (size_t k = 0; k < run; ++k) text += pick_range(rng, 0x1F300, 0x1F64F);
        break;
      case 6:
        for (size_t k = 0; k < run; ++k) text += pick_range(rng, 0x2000, 0x2BFF);
        break;
      case 7: {
        static const std::u32string spaces = U" \t\n\u00A0\u3000\u2009\v";
        for (size_t k = 0; k < run; ++k) text += spaces[rng.uniform_index(spaces.size())];
        break;
      }
      case 8:
        text += pick_range(rng, 0x0900, 0x097F);  // Devanagari, untouched script
        break;
      default:
        text += hof::unicode::decode_utf8(kPieces[rng.uniform_index(kPieces.size())]);
        break;
    }
  }
  return hof::unicode::encode_utf8(text);
}

void write_synthetic_corpus(const fs::path& path, const std::string& id_prefix,
                            size_t hof, size_t not_offensive, size_t unlabeled,
                            uint64_t seed) {
  std::vector<std::string> labels;
  labels.insert(labels.end(), hof, "HOF");
  labels.insert(labels.end(), not_offensive, "NOT");
  hof::Rng rng(seed);
  rng.shuffle(std::span<std::string>(labels));
  std::ostringstream out;
  const bool labeled = unlabeled == 0;
  out << (labeled ? "id\ttext\tlabel\n" : "id\ttext\n");
  const size_t n = labeled ? labels.size() : unlabeled;
  for (size_t i = 0; i < n; ++i) {
    std::string text = "পোস্ট " + random_post(rng, 8);
    // Keep the file well formed: no raw tabs, newlines or leading quotes.
    for (char& c : text) {
      if (c == '\t' || c == '\n' || c == '\r' || c == '"') c = ' ';
    }
    out << id_prefix << i << '\t' << text;
    if (labeled) out << '\t' << labels[i];
    out << '\n';
  }
  write_file(path, out.str());
}

CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliResult r;
  r.code = hof::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

}  // namespace testing_support
