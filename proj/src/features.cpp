#include "ada/features.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <numbers>
#include <sstream>
#include <unordered_set>

#include "ada/error.hpp"
#include "binary_io.hpp"

namespace ada {

namespace fs = std::filesystem;

FeatureMatrix::FeatureMatrix(std::size_t n_frames, std::size_t n_dims, double frame_rate)
    : FeatureMatrix(n_frames, n_dims, std::vector<float>(n_frames * n_dims, 0.0f), frame_rate) {}

FeatureMatrix::FeatureMatrix(std::size_t n_frames, std::size_t n_dims, std::vector<float> data,
                             double frame_rate)
    : n_frames_(n_frames), n_dims_(n_dims), frame_rate_(frame_rate), data_(std::move(data)) {
  if (n_dims_ == 0) throw Error(Errc::InvalidArgument, "feature matrix needs n_dims > 0");
  if (data_.size() != n_frames_ * n_dims_) {
    throw Error(Errc::InvalidArgument, "feature payload size " + std::to_string(data_.size()) +
                                           " != " + std::to_string(n_frames_) + "x" +
                                           std::to_string(n_dims_));
  }
}

FeatureMatrix FeatureMatrix::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > n_frames_) {
    throw Error(Errc::SpanOutOfRange, "slice [" + std::to_string(begin) + ", " +
                                          std::to_string(end) + ") of " +
                                          std::to_string(n_frames_) + " frames");
  }
  std::vector<float> rows(data_.begin() + static_cast<std::ptrdiff_t>(begin * n_dims_),
                          data_.begin() + static_cast<std::ptrdiff_t>(end * n_dims_));
  return FeatureMatrix(end - begin, n_dims_, std::move(rows), frame_rate_);
}

bool FeatureMatrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

bool operator==(const FeatureMatrix& a, const FeatureMatrix& b) noexcept {
  return a.n_frames_ == b.n_frames_ && a.n_dims_ == b.n_dims_ &&
         (a.data_.empty() ||
          std::memcmp(a.data_.data(), b.data_.data(), a.data_.size() * sizeof(float)) == 0);
}

std::vector<std::string> tokenize_transcript(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) tokens.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

std::string join_tokens(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// ADAF

namespace {

constexpr char kAdafMagic[4] = {'A', 'D', 'A', 'F'};

FeatureHeader read_header(detail::Reader& r) {
  char magic[4];
  try {
    r.bytes(magic, 4);
  } catch (const Error&) {
    throw Error(Errc::BadMagic, r.source() + ": shorter than the magic");
  }
  if (std::memcmp(magic, kAdafMagic, 4) != 0) throw Error(Errc::BadMagic, r.source());
  FeatureHeader h{};
  h.n_frames = r.le<std::uint32_t>();
  h.n_dims = r.le<std::uint32_t>();
  if (h.n_dims == 0) throw Error(Errc::InvalidArgument, r.source() + ": n_dims is 0");
  return h;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  return in;
}

}  // namespace

FeatureHeader read_feature_header(const fs::path& path) {
  auto in = open_input(path);
  detail::Reader r(in, path.string());
  return read_header(r);
}

FeatureMatrix read_features(const fs::path& path) {
  auto in = open_input(path);
  detail::Reader r(in, path.string());
  const auto h = read_header(r);
  std::vector<float> data(static_cast<std::size_t>(h.n_frames) * h.n_dims);
  r.f32_block(data);
  FeatureMatrix m(h.n_frames, h.n_dims, std::move(data));
  if (!m.all_finite()) throw Error(Errc::NonFiniteValue, path.string());
  return m;
}

void write_features(const FeatureMatrix& m, const fs::path& path) {
  if (!m.all_finite()) throw Error(Errc::NonFiniteValue, "refusing to write " + path.string());
  if (m.n_frames() > UINT32_MAX || m.n_dims() > UINT32_MAX) {
    throw Error(Errc::InvalidArgument, "matrix too large for ADAF");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoFailure, "cannot create " + path.string());
  out.write(kAdafMagic, 4);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.n_frames()));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.n_dims()));
  detail::put_f32_block(out, m.data());
  out.flush();
  if (!out) throw Error(Errc::IoFailure, "write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Manifest

CorpusManifest parse_manifest(std::string_view text, const fs::path& base_dir) {
  CorpusManifest manifest;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      if (nl == text.size()) break;
      continue;
    }
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string_view::npos) {
      throw Error(Errc::MalformedManifest,
                  "line " + std::to_string(line_no) + ": expected utt_id<TAB>path<TAB>transcript");
    }
    ManifestEntry e;
    e.utt_id = std::string(line.substr(0, t1));
    if (e.utt_id.empty()) {
      throw Error(Errc::MalformedManifest, "line " + std::to_string(line_no) + ": empty utt_id");
    }
    fs::path p(std::string(line.substr(t1 + 1, t2 - t1 - 1)));
    e.feature_path = (p.is_relative() && !base_dir.empty()) ? base_dir / p : p;
    e.transcript = tokenize_transcript(line.substr(t2 + 1));
    if (!seen.insert(e.utt_id).second) throw Error(Errc::DuplicateUtterance, e.utt_id);
    manifest.entries.push_back(std::move(e));
    if (nl == text.size()) break;
  }
  return manifest;
}

CorpusManifest read_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open manifest " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), path.parent_path());
}

std::string format_manifest(const CorpusManifest& manifest) {
  std::string out;
  for (const auto& e : manifest.entries) {
    out += e.utt_id;
    out += '\t';
    out += e.feature_path.string();
    out += '\t';
    out += join_tokens(e.transcript);
    out += '\n';
  }
  return out;
}

void write_manifest(const CorpusManifest& manifest, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoFailure, "cannot create " + path.string());
  out << format_manifest(manifest);
  if (!out) throw Error(Errc::IoFailure, "write failed: " + path.string());
}

Utterance load_utterance(const ManifestEntry& entry) {
  if (!fs::exists(entry.feature_path)) {
    throw Error(Errc::MissingFeatureFile, entry.utt_id + ": " + entry.feature_path.string());
  }
  return Utterance{entry.utt_id, read_features(entry.feature_path), entry.transcript};
}

CorpusManifest filter_corpus(const CorpusManifest& manifest, std::size_t max_frames,
                             std::size_t max_units) {
  CorpusManifest kept;
  for (const auto& e : manifest.entries) {
    if (!fs::exists(e.feature_path)) {
      throw Error(Errc::MissingFeatureFile, e.utt_id + ": " + e.feature_path.string());
    }
    const auto h = read_feature_header(e.feature_path);
    if (h.n_frames <= max_frames && e.transcript.size() <= max_units) kept.entries.push_back(e);
  }
  return kept;
}

// ---------------------------------------------------------------------------
// Filterbank

std::size_t FbankConfig::window_length() const {
  return static_cast<std::size_t>(std::lround(sample_rate * window_ms / 1000.0));
}

std::size_t FbankConfig::hop_length() const {
  return static_cast<std::size_t>(std::lround(sample_rate * hop_ms / 1000.0));
}

double hz_to_mel(double hz) { return 1127.0 * std::log1p(hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * std::expm1(mel / 1127.0); }

std::vector<std::vector<double>> mel_filterbank(const FbankConfig& cfg) {
  const std::size_t n_bins = cfg.fft_size / 2 + 1;
  const double mel_lo = hz_to_mel(cfg.fmin);
  const double mel_hi = hz_to_mel(cfg.fmax);
  const double step = (mel_hi - mel_lo) / static_cast<double>(cfg.n_mels + 1);
  std::vector<std::vector<double>> weights(cfg.n_mels, std::vector<double>(n_bins, 0.0));
  for (std::size_t m = 0; m < cfg.n_mels; ++m) {
    const double left = mel_lo + step * static_cast<double>(m);
    const double center = left + step;
    const double right = center + step;
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double hz = static_cast<double>(k) * cfg.sample_rate / static_cast<double>(cfg.fft_size);
      const double mel = hz_to_mel(hz);
      if (mel > left && mel < center) {
        weights[m][k] = (mel - left) / (center - left);
      } else if (mel >= center && mel < right) {
        weights[m][k] = (right - mel) / (right - center);
      }
    }
  }
  return weights;
}

namespace {

// fftw's planner is not thread-safe; execution on new arrays is.
std::mutex g_fftw_planner_mutex;

class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard lock(g_fftw_planner_mutex);
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  ~RealFft() {
    {
      std::lock_guard lock(g_fftw_planner_mutex);
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }

  double* input() { return in_; }

  /// Power spectrum |X_k|^2 for k in [0, n/2].
  void power(std::vector<double>& out) {
    fftw_execute(plan_);
    out.resize(n_ / 2 + 1);
    for (std::size_t k = 0; k < out.size(); ++k) {
      out[k] = out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1];
    }
  }

 private:
  std::size_t n_;
  double* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

}  // namespace

FeatureMatrix extract_fbank(std::span<const float> samples, int sample_rate,
                            const FbankConfig& cfg) {
  if (sample_rate != cfg.sample_rate || sample_rate <= 0) {
    throw Error(Errc::BadSampleRate, "got " + std::to_string(sample_rate) + " Hz, expected " +
                                         std::to_string(cfg.sample_rate));
  }
  const std::size_t win = cfg.window_length();
  const std::size_t hop = cfg.hop_length();
  if (cfg.n_mels == 0 || win == 0 || hop == 0 || cfg.fft_size < win ||
      !(cfg.fmin >= 0.0 && cfg.fmin < cfg.fmax && cfg.fmax <= sample_rate / 2.0)) {
    throw Error(Errc::InvalidArgument, "inconsistent fbank configuration");
  }
  const double frame_rate = static_cast<double>(sample_rate) / static_cast<double>(hop);
  if (samples.size() < win) return FeatureMatrix(0, cfg.n_mels, frame_rate);

  const std::size_t n_frames = 1 + (samples.size() - win) / hop;
  const auto weights = mel_filterbank(cfg);

  std::vector<double> window(win);
  for (std::size_t i = 0; i < win; ++i) {
    window[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                       static_cast<double>(win - 1));
  }

  RealFft fft(cfg.fft_size);
  std::vector<double> frame(win);
  std::vector<double> power;
  FeatureMatrix out(n_frames, cfg.n_mels, frame_rate);
  const double log_floor = std::log(cfg.energy_floor);

  for (std::size_t t = 0; t < n_frames; ++t) {
    const float* src = samples.data() + t * hop;
    for (std::size_t i = 0; i < win; ++i) frame[i] = src[i];
    for (std::size_t i = win - 1; i > 0; --i) frame[i] -= cfg.preemphasis * frame[i - 1];
    frame[0] -= cfg.preemphasis * frame[0];

    double* in = fft.input();
    for (std::size_t i = 0; i < win; ++i) in[i] = frame[i] * window[i];
    std::fill(in + win, in + cfg.fft_size, 0.0);
    fft.power(power);

    auto row = out.row(t);
    for (std::size_t m = 0; m < cfg.n_mels; ++m) {
      double energy = 0.0;
      const auto& w = weights[m];
      for (std::size_t k = 0; k < power.size(); ++k) energy += w[k] * power[k];
      row[m] = energy > cfg.energy_floor ? static_cast<float>(std::log(energy))
                                         : static_cast<float>(log_floor);
    }
  }
  return out;
}

std::vector<float> read_pcm16(const fs::path& path, int& sample_rate, int raw_sample_rate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  auto u16 = [&](std::size_t at) {
    return static_cast<std::uint16_t>(static_cast<unsigned char>(bytes[at]) |
                                      (static_cast<unsigned char>(bytes[at + 1]) << 8));
  };
  auto u32 = [&](std::size_t at) {
    return static_cast<std::uint32_t>(u16(at)) | (static_cast<std::uint32_t>(u16(at + 2)) << 16);
  };

  std::size_t data_begin = 0;
  std::size_t data_size = bytes.size();
  sample_rate = raw_sample_rate;
  if (bytes.size() >= 12 && bytes.compare(0, 4, "RIFF") == 0 && bytes.compare(8, 4, "WAVE") == 0) {
    std::size_t at = 12;
    bool have_fmt = false;
    data_size = 0;
    while (at + 8 <= bytes.size()) {
      const std::string id = bytes.substr(at, 4);
      const std::uint32_t size = u32(at + 4);
      const std::size_t body = at + 8;
      if (id == "fmt ") {
        if (body + 16 > bytes.size()) throw Error(Errc::TruncatedFile, path.string());
        const auto format = u16(body);
        const auto channels = u16(body + 2);
        const auto bits = u16(body + 14);
        if (format != 1 || channels != 1 || bits != 16) {
          throw Error(Errc::InvalidArgument, path.string() + ": only PCM16 mono WAV is supported");
        }
        sample_rate = static_cast<int>(u32(body + 4));
        have_fmt = true;
      } else if (id == "data") {
        data_begin = body;
        data_size = std::min<std::size_t>(size, bytes.size() - body);
        break;
      }
      at = body + size + (size & 1u);
    }
    if (!have_fmt) throw Error(Errc::InvalidArgument, path.string() + ": WAV without fmt chunk");
  }

  std::vector<float> samples(data_size / 2);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i] = static_cast<float>(static_cast<std::int16_t>(u16(data_begin + 2 * i)));
  }
  return samples;
}

}  // namespace ada
