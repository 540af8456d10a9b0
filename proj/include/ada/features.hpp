#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ada {

/// Frames-by-dims grid of acoustic features, row-major, one row per frame.
class FeatureMatrix {
 public:
  static constexpr std::size_t kDefaultDims = 80;
  static constexpr double kDefaultFrameRate = 100.0;

  FeatureMatrix() = default;
  /// Zero-filled matrix. Throws InvalidArgument if n_dims == 0.
  FeatureMatrix(std::size_t n_frames, std::size_t n_dims,
                double frame_rate = kDefaultFrameRate);
  /// Takes ownership of `data`; its size must equal n_frames * n_dims.
  FeatureMatrix(std::size_t n_frames, std::size_t n_dims, std::vector<float> data,
                double frame_rate = kDefaultFrameRate);

  std::size_t n_frames() const noexcept { return n_frames_; }
  std::size_t n_dims() const noexcept { return n_dims_; }
  double frame_rate() const noexcept { return frame_rate_; }
  bool empty() const noexcept { return n_frames_ == 0; }

  std::span<const float> data() const noexcept { return data_; }
  std::span<float> data() noexcept { return data_; }

  std::span<const float> row(std::size_t frame) const noexcept {
    return {data_.data() + frame * n_dims_, n_dims_};
  }
  std::span<float> row(std::size_t frame) noexcept {
    return {data_.data() + frame * n_dims_, n_dims_};
  }
  float at(std::size_t frame, std::size_t dim) const noexcept {
    return data_[frame * n_dims_ + dim];
  }
  float& at(std::size_t frame, std::size_t dim) noexcept {
    return data_[frame * n_dims_ + dim];
  }

  /// Copy of rows [begin, end).
  FeatureMatrix slice(std::size_t begin, std::size_t end) const;

  bool all_finite() const noexcept;

  /// Value equality on shape and payload bits; frame_rate is metadata.
  friend bool operator==(const FeatureMatrix& a, const FeatureMatrix& b) noexcept;

 private:
  std::size_t n_frames_ = 0;
  std::size_t n_dims_ = kDefaultDims;
  double frame_rate_ = kDefaultFrameRate;
  std::vector<float> data_;
};

/// Lowercases ASCII letters and splits on whitespace.
std::vector<std::string> tokenize_transcript(std::string_view text);
std::string join_tokens(std::span<const std::string> tokens);

struct Utterance {
  std::string utt_id;
  FeatureMatrix features;
  std::vector<std::string> transcript;
};

struct ManifestEntry {
  std::string utt_id;
  std::filesystem::path feature_path;
  std::vector<std::string> transcript;
};

struct CorpusManifest {
  std::vector<ManifestEntry> entries;

  std::size_t size() const noexcept { return entries.size(); }
  bool empty() const noexcept { return entries.empty(); }
};

// ADAF file: "ADAF", n_frames u32 LE, n_dims u32 LE, f32 LE payload.
inline constexpr std::size_t kAdafHeaderBytes = 12;

FeatureMatrix read_features(const std::filesystem::path& path);
void write_features(const FeatureMatrix& m, const std::filesystem::path& path);

struct FeatureHeader {
  std::uint32_t n_frames;
  std::uint32_t n_dims;
};
/// Reads only the header (used by filtering, which never needs the payload).
FeatureHeader read_feature_header(const std::filesystem::path& path);

/// Parses a manifest TSV. Relative feature paths resolve against `base_dir`.
CorpusManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir = {});
CorpusManifest read_manifest(const std::filesystem::path& path);
std::string format_manifest(const CorpusManifest& manifest);
void write_manifest(const CorpusManifest& manifest, const std::filesystem::path& path);

Utterance load_utterance(const ManifestEntry& entry);

/// Keeps entries with n_frames <= max_frames and at most max_units word
/// tokens, preserving order. Throws MissingFeatureFile.
CorpusManifest filter_corpus(const CorpusManifest& manifest, std::size_t max_frames = 3000,
                             std::size_t max_units = 80);

struct FbankConfig {
  int sample_rate = 16000;
  std::size_t n_mels = 80;
  double window_ms = 25.0;
  double hop_ms = 10.0;
  std::size_t fft_size = 512;
  double fmin = 20.0;
  double fmax = 7600.0;
  double preemphasis = 0.97;
  double energy_floor = 1e-10;

  std::size_t window_length() const;
  std::size_t hop_length() const;
};

/// Triangular mel weights, n_mels rows by (fft_size / 2 + 1) columns.
std::vector<std::vector<double>> mel_filterbank(const FbankConfig& cfg);
double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Log-mel filterbank features. Samples are mono PCM at cfg.sample_rate;
/// clips shorter than one window yield a 0-frame matrix.
FeatureMatrix extract_fbank(std::span<const float> samples, int sample_rate,
                            const FbankConfig& cfg = {});

/// Reads a PCM16 mono RIFF/WAVE file or headerless s16le samples.
/// For headerless input the rate is `raw_sample_rate`.
std::vector<float> read_pcm16(const std::filesystem::path& path, int& sample_rate,
                              int raw_sample_rate = 16000);

}  // namespace ada
