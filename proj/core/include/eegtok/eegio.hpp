#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace eegtok {

enum class Label : std::uint8_t { HC = 0, AD = 1 };

// One multi-channel recording. Samples are stored as doubles in memory but
// serialized as IEEE-754 float32, so files round-trip bit-exactly when the
// values are float32-representable (everything this toolkit produces is).
struct Recording {
  std::string subject_id;
  Label label = Label::HC;
  double fs = 0.0;
  std::vector<std::string> channels;
  std::vector<std::vector<double>> data;  // [n_channels][n_samples]

  std::size_t n_channels() const { return channels.size(); }
  std::size_t n_samples() const { return data.empty() ? 0 : data[0].size(); }
  // Throws std::invalid_argument on any violated invariant.
  void validate() const;
};

struct ManifestEntry {
  std::string subject_id;
  Label label = Label::HC;
  std::string path;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
};

// EEG rhythm bands; Full means no sub-band decomposition.
enum class Band { Delta = 0, Theta, Alpha, Beta, Gamma, Full };

const char* band_name(Band b);
Band band_from_name(const std::string& name);

struct SynthSpec {
  int n_subjects_per_class = 4;
  double duration_s = 16.0;
  double fs = 128.0;
  // Relative band power per class, keyed by Band (Delta..Gamma).
  std::map<Band, double> hc_band_powers = {
      {Band::Delta, 0.10}, {Band::Theta, 0.10}, {Band::Alpha, 1.00},
      {Band::Beta, 0.15},  {Band::Gamma, 0.15}};
  std::map<Band, double> ad_band_powers = {
      {Band::Delta, 1.00}, {Band::Theta, 0.70}, {Band::Alpha, 0.05},
      {Band::Beta, 0.15},  {Band::Gamma, 0.02}};
  double noise_sigma = 0.3;
  std::uint64_t seed = 0;

  void validate() const;
};

// "EEGB v1" container: fixed little-endian header + channel-major float32.
void write_recording(const Recording& rec, const std::string& path);
Recording read_recording(const std::string& path);

void write_manifest(const Manifest& m, const std::string& path);
Manifest read_manifest(const std::string& path);

// Deterministic labeled synthetic EEG. Writes one EEGB file per subject into
// out_dir plus a manifest.jsonl; returns the manifest.
Manifest synthesize_dataset(const SynthSpec& spec, const std::string& out_dir);

// In-memory variant (no I/O) used by tests.
std::vector<Recording> synthesize_recordings(const SynthSpec& spec);

}  // namespace eegtok
