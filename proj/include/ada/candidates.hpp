#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ada/rng.hpp"

namespace ada {

struct Candidate {
  std::string token;
  double logprob = 0.0;
  friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// LM suggestions for one transcript position, best first.
struct CandidateSet {
  std::size_t position = 0;
  std::vector<Candidate> candidates;
  friend bool operator==(const CandidateSet&, const CandidateSet&) = default;
};

/// Masked-LM style predictor: for each position, suggest replacement words
/// given the rest of the sentence. Implementations must be safe to call
/// from several threads at once.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual std::vector<CandidateSet> predict(std::span<const std::string> tokens,
                                            std::span<const std::size_t> positions,
                                            std::size_t top_k) const = 0;
};

/// Client for the LM server's POST /predict endpoint.
class HttpPredictor final : public Predictor {
 public:
  /// `endpoint` is a base URL such as "http://127.0.0.1:8080".
  explicit HttpPredictor(std::string endpoint,
                         std::chrono::milliseconds timeout = std::chrono::seconds(10));

  std::vector<CandidateSet> predict(std::span<const std::string> tokens,
                                    std::span<const std::size_t> positions,
                                    std::size_t top_k) const override;

  const std::string& endpoint() const noexcept { return endpoint_; }

 private:
  std::string endpoint_;
  std::chrono::milliseconds timeout_;
};

/// Fixed-table predictor for tests and offline runs. The table maps the
/// token at the masked position to its candidate list; unknown tokens get
/// no candidates.
///
/// TSV layout, one row per token:
///   token<TAB>cand1:logprob<SPACE>cand2:logprob ...
class MockPredictor final : public Predictor {
 public:
  MockPredictor() = default;
  explicit MockPredictor(std::map<std::string, std::vector<Candidate>, std::less<>> table);

  static MockPredictor parse(std::string_view tsv);
  static MockPredictor from_file(const std::filesystem::path& path);

  std::vector<CandidateSet> predict(std::span<const std::string> tokens,
                                    std::span<const std::size_t> positions,
                                    std::size_t top_k) const override;

 private:
  std::map<std::string, std::vector<Candidate>, std::less<>> table_;
};

/// Request body for POST /predict.
std::string encode_predict_request(std::span<const std::string> tokens,
                                   std::span<const std::size_t> positions, std::size_t top_k);
/// Parses a /predict response, checking it answers exactly `positions`.
/// Candidates are lowercased, sorted best first and cut to top_k.
/// Throws ProtocolError.
std::vector<CandidateSet> decode_predict_response(std::string_view body,
                                                  std::span<const std::size_t> positions,
                                                  std::size_t top_k);

/// Uniform over `keys` (sorted, unique) minus `exclude_original`; returns
/// `exclude_original` when nothing else is available. Throws EmptyKeySet.
const std::string& random_token(std::span<const std::string> keys, Rng& rng,
                                std::string_view exclude_original);

/// Samples proportionally to softmax(logprob / temperature).
/// Throws EmptyCandidates, InvalidArgument (temperature <= 0).
const std::string& choose(const CandidateSet& cs, Rng& rng, double temperature = 1.0);

}  // namespace ada
