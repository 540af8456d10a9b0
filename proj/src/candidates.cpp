#include "ada/candidates.hpp"

#include <httplib.h>

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ada/error.hpp"

namespace ada {

using nlohmann::json;

namespace {

void check_request(std::span<const std::string> tokens, std::span<const std::size_t> positions,
                   std::size_t top_k) {
  if (top_k == 0) throw Error(Errc::InvalidArgument, "top_k must be >= 1");
  for (auto p : positions) {
    if (p >= tokens.size()) {
      throw Error(Errc::InvalidArgument, "position " + std::to_string(p) + " outside " +
                                             std::to_string(tokens.size()) + " tokens");
    }
  }
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_whole_word(std::string_view s) {
  return !s.empty() && std::none_of(s.begin(), s.end(), [](char c) {
    return std::isspace(static_cast<unsigned char>(c));
  });
}

void sort_and_cut(std::vector<Candidate>& cands, std::size_t top_k) {
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Candidate& a, const Candidate& b) { return a.logprob > b.logprob; });
  if (cands.size() > top_k) cands.resize(top_k);
}

}  // namespace

std::string encode_predict_request(std::span<const std::string> tokens,
                                   std::span<const std::size_t> positions, std::size_t top_k) {
  json body;
  body["tokens"] = json::array();
  for (const auto& t : tokens) body["tokens"].push_back(t);
  body["mask_positions"] = json::array();
  for (auto p : positions) body["mask_positions"].push_back(p);
  body["top_k"] = top_k;
  return body.dump();
}

std::vector<CandidateSet> decode_predict_response(std::string_view body,
                                                  std::span<const std::size_t> positions,
                                                  std::size_t top_k) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    throw Error(Errc::ProtocolError, std::string("response is not JSON: ") + e.what());
  }

  std::map<std::size_t, std::vector<Candidate>> by_position;
  try {
    const auto& preds = doc.at("predictions");
    if (!preds.is_array()) throw Error(Errc::ProtocolError, "'predictions' is not an array");
    for (const auto& p : preds) {
      const auto pos = p.at("position").get<std::size_t>();
      std::vector<Candidate> cands;
      for (const auto& c : p.at("candidates")) {
        Candidate cand{lowercase(c.at("token").get<std::string>()), c.at("logprob").get<double>()};
        if (!is_whole_word(cand.token) || !std::isfinite(cand.logprob)) {
          throw Error(Errc::ProtocolError, "invalid candidate '" + cand.token + "'");
        }
        cands.push_back(std::move(cand));
      }
      if (!by_position.emplace(pos, std::move(cands)).second) {
        throw Error(Errc::ProtocolError, "position " + std::to_string(pos) + " answered twice");
      }
    }
  } catch (const json::exception& e) {
    throw Error(Errc::ProtocolError, std::string("unexpected response shape: ") + e.what());
  }

  std::vector<CandidateSet> out;
  out.reserve(positions.size());
  for (auto pos : positions) {
    auto it = by_position.find(pos);
    if (it == by_position.end()) {
      throw Error(Errc::ProtocolError, "no prediction for position " + std::to_string(pos));
    }
    CandidateSet cs{pos, std::move(it->second)};
    sort_and_cut(cs.candidates, top_k);
    out.push_back(std::move(cs));
    by_position.erase(it);
  }
  if (!by_position.empty()) {
    throw Error(Errc::ProtocolError,
                "prediction for unrequested position " + std::to_string(by_position.begin()->first));
  }
  return out;
}

// ---------------------------------------------------------------------------

HttpPredictor::HttpPredictor(std::string endpoint, std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)), timeout_(timeout) {
  while (!endpoint_.empty() && endpoint_.back() == '/') endpoint_.pop_back();
  if (endpoint_.empty()) throw Error(Errc::InvalidArgument, "empty LM endpoint");
}

std::vector<CandidateSet> HttpPredictor::predict(std::span<const std::string> tokens,
                                                 std::span<const std::size_t> positions,
                                                 std::size_t top_k) const {
  check_request(tokens, positions, top_k);
  if (positions.empty()) return {};

  // Split "scheme://host:port/prefix" into the client base and a path prefix.
  std::string base = endpoint_;
  std::string prefix;
  const auto scheme_end = endpoint_.find("://");
  const auto path_begin = endpoint_.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  if (path_begin != std::string::npos) {
    base = endpoint_.substr(0, path_begin);
    prefix = endpoint_.substr(path_begin);
  }

  httplib::Client client(base);
  if (!client.is_valid()) throw Error(Errc::ServerUnreachable, "invalid endpoint " + endpoint_);
  const auto sec = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  const auto usec = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - sec);
  client.set_connection_timeout(sec.count(), usec.count());
  client.set_read_timeout(sec.count(), usec.count());
  client.set_write_timeout(sec.count(), usec.count());

  auto res = client.Post(prefix + "/predict", encode_predict_request(tokens, positions, top_k),
                         "application/json");
  if (!res) {
    const auto err = res.error();
    const std::string what = endpoint_ + ": " + httplib::to_string(err);
    if (err == httplib::Error::Read || err == httplib::Error::Write ||
        err == httplib::Error::ConnectionTimeout) {
      throw Error(Errc::Timeout, what);
    }
    throw Error(Errc::ServerUnreachable, what);
  }
  if (res->status != 200) {
    throw Error(Errc::ProtocolError, endpoint_ + " answered HTTP " + std::to_string(res->status));
  }
  return decode_predict_response(res->body, positions, top_k);
}

// ---------------------------------------------------------------------------

MockPredictor::MockPredictor(std::map<std::string, std::vector<Candidate>, std::less<>> table)
    : table_(std::move(table)) {
  for (auto& [token, cands] : table_) sort_and_cut(cands, cands.size());
}

MockPredictor MockPredictor::parse(std::string_view tsv) {
  std::map<std::string, std::vector<Candidate>, std::less<>> table;
  std::istringstream in{std::string(tsv)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw Error(Errc::MalformedLine, "mock table line " + std::to_string(line_no));
    }
    auto& cands = table[lowercase(line.substr(0, tab))];
    std::istringstream fields(line.substr(tab + 1));
    std::string field;
    while (fields >> field) {
      const auto colon = field.rfind(':');
      double lp = 0.0;
      if (colon == std::string::npos || colon == 0) {
        throw Error(Errc::MalformedLine, "mock table line " + std::to_string(line_no) +
                                             ": expected word:logprob, got '" + field + "'");
      }
      const char* first = field.data() + colon + 1;
      const char* last = field.data() + field.size();
      auto [ptr, ec] = std::from_chars(first, last, lp);
      if (ec != std::errc() || ptr != last) {
        throw Error(Errc::MalformedLine, "mock table line " + std::to_string(line_no) +
                                             ": bad logprob in '" + field + "'");
      }
      cands.push_back({lowercase(field.substr(0, colon)), lp});
    }
  }
  return MockPredictor(std::move(table));
}

MockPredictor MockPredictor::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoFailure, "cannot open mock table " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::vector<CandidateSet> MockPredictor::predict(std::span<const std::string> tokens,
                                                 std::span<const std::size_t> positions,
                                                 std::size_t top_k) const {
  check_request(tokens, positions, top_k);
  std::vector<CandidateSet> out;
  out.reserve(positions.size());
  for (auto pos : positions) {
    CandidateSet cs{pos, {}};
    auto it = table_.find(tokens[pos]);
    if (it != table_.end()) {
      cs.candidates.assign(it->second.begin(),
                           it->second.begin() + static_cast<std::ptrdiff_t>(
                                                    std::min(top_k, it->second.size())));
    }
    out.push_back(std::move(cs));
  }
  return out;
}

// ---------------------------------------------------------------------------

const std::string& random_token(std::span<const std::string> keys, Rng& rng,
                                std::string_view exclude_original) {
  if (keys.empty()) throw Error(Errc::EmptyKeySet, "cannot draw a random token");
  auto it = std::lower_bound(keys.begin(), keys.end(), exclude_original);
  const bool present = it != keys.end() && *it == exclude_original;
  if (!present) return keys[rng.index(keys.size())];
  if (keys.size() == 1) return keys[0];
  const auto skip = static_cast<std::size_t>(it - keys.begin());
  std::size_t i = rng.index(keys.size() - 1);
  if (i >= skip) ++i;
  return keys[i];
}

const std::string& choose(const CandidateSet& cs, Rng& rng, double temperature) {
  if (cs.candidates.empty()) {
    throw Error(Errc::EmptyCandidates, "position " + std::to_string(cs.position));
  }
  if (!(temperature > 0.0)) throw Error(Errc::InvalidArgument, "temperature must be > 0");
  if (cs.candidates.size() == 1) return cs.candidates[0].token;

  double best = cs.candidates[0].logprob;
  for (const auto& c : cs.candidates) best = std::max(best, c.logprob);
  std::vector<double> cumulative;
  cumulative.reserve(cs.candidates.size());
  double total = 0.0;
  for (const auto& c : cs.candidates) {
    total += std::exp((c.logprob - best) / temperature);
    cumulative.push_back(total);
  }
  const double u = rng.uniform01() * total;
  const auto idx = static_cast<std::size_t>(
      std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
  return cs.candidates[std::min(idx, cs.candidates.size() - 1)].token;
}

}  // namespace ada
