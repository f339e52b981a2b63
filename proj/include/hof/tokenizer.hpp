#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hof {

using TokenId = int32_t;

class Tokenizer {
 public:
  virtual ~Tokenizer() = default;

  // Sub-word ids without special tokens.
  virtual std::vector<TokenId> tokenize(std::string_view text) const = 0;
  virtual size_t vocab_size() const = 0;

  TokenId pad_id() const { return pad_id_; }
  TokenId unk_id() const { return unk_id_; }
  TokenId cls_id() const { return cls_id_; }
  TokenId sep_id() const { return sep_id_; }

  // [CLS] tokens [SEP]. Sequences longer than max_length are cut (keeping
  // [SEP]) when truncate is set, otherwise SequenceTooLong is thrown.
  std::vector<TokenId> encode(std::string_view text, size_t max_length,
                              bool truncate = true) const;

 protected:
  TokenId pad_id_ = 0;
  TokenId unk_id_ = 1;
  TokenId cls_id_ = 2;
  TokenId sep_id_ = 3;
};

// Whitespace words hashed into a fixed vocabulary. Used by the toy backbone,
// which has no learned vocabulary.
class HashingTokenizer final : public Tokenizer {
 public:
  explicit HashingTokenizer(size_t vocab_size);

  std::vector<TokenId> tokenize(std::string_view text) const override;
  size_t vocab_size() const override { return vocab_size_; }

 private:
  size_t vocab_size_;
};

// BERT WordPiece: basic tokenization (cleanup, optional lower-casing with
// accent stripping, punctuation splitting) followed by greedy
// longest-match-first sub-word lookup with "##" continuations.
class WordPieceTokenizer final : public Tokenizer {
 public:
  WordPieceTokenizer(std::vector<std::string> vocab, bool do_lower_case);

  static WordPieceTokenizer from_file(const std::filesystem::path& vocab_file,
                                      bool do_lower_case);

  std::vector<TokenId> tokenize(std::string_view text) const override;
  size_t vocab_size() const override { return vocab_.size(); }

  std::vector<std::string> basic_tokenize(std::string_view text) const;

 private:
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, TokenId> index_;
  bool do_lower_case_;
};

}  // namespace hof
