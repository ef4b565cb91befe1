#include "eegtok/eegio.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "eegtok/montage.hpp"
#include "eegtok/rng.hpp"

namespace eegtok {
namespace {

constexpr char kMagic[4] = {'E', 'E', 'G', 'B'};
constexpr std::uint16_t kVersion = 1;

template <class T>
void put(std::ostream& os, T v) {
  // Host is little-endian on every supported platform.
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("EEGB: truncated file");
  return v;
}

void put_string(std::ostream& os, const std::string& s) {
  if (s.size() > UINT16_MAX) throw std::invalid_argument("string too long");
  put<std::uint16_t>(os, static_cast<std::uint16_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& is) {
  const auto n = get<std::uint16_t>(is);
  std::string s(n, '\0');
  is.read(s.data(), n);
  if (!is) throw std::runtime_error("EEGB: truncated file");
  return s;
}

}  // namespace

void Recording::validate() const {
  if (fs <= 0.0) throw std::invalid_argument("invalid recording: fs must be positive");
  if (channels.empty() || data.size() != channels.size())
    throw std::invalid_argument("invalid recording: channel count mismatch");
  const std::size_t n = data[0].size();
  if (n == 0) throw std::invalid_argument("invalid recording: no samples");
  for (const auto& row : data) {
    if (row.size() != n) throw std::invalid_argument("invalid recording: ragged data");
    for (double v : row)
      if (!std::isfinite(v)) throw std::invalid_argument("invalid recording: non-finite sample");
  }
}

const char* band_name(Band b) {
  switch (b) {
    case Band::Delta: return "delta";
    case Band::Theta: return "theta";
    case Band::Alpha: return "alpha";
    case Band::Beta: return "beta";
    case Band::Gamma: return "gamma";
    case Band::Full: return "full";
  }
  return "?";
}

Band band_from_name(const std::string& name) {
  for (Band b : {Band::Delta, Band::Theta, Band::Alpha, Band::Beta, Band::Gamma, Band::Full})
    if (name == band_name(b)) return b;
  throw std::invalid_argument("unknown band: " + name);
}

void SynthSpec::validate() const {
  if (n_subjects_per_class < 1) throw std::invalid_argument("synth: need >= 1 subject per class");
  if (duration_s <= 0 || fs <= 0) throw std::invalid_argument("synth: duration and fs must be positive");
  if (noise_sigma < 0) throw std::invalid_argument("synth: negative noise");
  for (const auto* powers : {&hc_band_powers, &ad_band_powers})
    for (const auto& [b, p] : *powers)
      if (p < 0) throw std::invalid_argument("synth: negative band power");
  // Need at least two 1 s windows after resampling to 128 Hz.
  if (duration_s < 2.0)
    throw std::invalid_argument("synth: recording too short for segmentation");
}

void write_recording(const Recording& rec, const std::string& path) {
  rec.validate();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os.write(kMagic, 4);
  put<std::uint16_t>(os, kVersion);
  put<double>(os, rec.fs);
  put<std::uint16_t>(os, static_cast<std::uint16_t>(rec.n_channels()));
  put<std::uint64_t>(os, static_cast<std::uint64_t>(rec.n_samples()));
  put<std::uint8_t>(os, static_cast<std::uint8_t>(rec.label));
  put_string(os, rec.subject_id);
  for (const auto& name : rec.channels) put_string(os, name);
  for (const auto& row : rec.data)
    for (double v : row) put<float>(os, static_cast<float>(v));
  if (!os) throw std::runtime_error("write failed: " + path);
}

Recording read_recording(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("EEGB: bad magic in " + path);
  const auto version = get<std::uint16_t>(is);
  if (version != kVersion) throw std::runtime_error("EEGB: unsupported version");
  Recording rec;
  rec.fs = get<double>(is);
  const auto n_channels = get<std::uint16_t>(is);
  const auto n_samples = get<std::uint64_t>(is);
  rec.label = static_cast<Label>(get<std::uint8_t>(is));
  rec.subject_id = get_string(is);
  rec.channels.resize(n_channels);
  for (auto& name : rec.channels) name = get_string(is);
  rec.data.assign(n_channels, std::vector<double>(n_samples));
  for (auto& row : rec.data)
    for (auto& v : row) v = static_cast<double>(get<float>(is));
  rec.validate();
  return rec;
}

void write_manifest(const Manifest& m, const std::string& path) {
  std::set<std::string> seen;
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  for (const auto& e : m.entries) {
    if (!seen.insert(e.subject_id).second)
      throw std::invalid_argument("manifest: duplicate subject_id " + e.subject_id);
    nlohmann::json j = {{"subject_id", e.subject_id},
                        {"label", static_cast<int>(e.label)},
                        {"path", e.path}};
    os << j.dump() << "\n";
  }
}

Manifest read_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path);
  Manifest m;
  std::set<std::string> seen;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    ManifestEntry e;
    e.subject_id = j.at("subject_id").get<std::string>();
    const int label = j.at("label").get<int>();
    if (label != 0 && label != 1) throw std::runtime_error("manifest: bad label");
    e.label = static_cast<Label>(label);
    e.path = j.at("path").get<std::string>();
    if (!seen.insert(e.subject_id).second)
      throw std::runtime_error("manifest: duplicate subject_id " + e.subject_id);
    m.entries.push_back(std::move(e));
  }
  return m;
}

namespace {

// Carrier frequency per rhythm, chosen at the band centers used downstream.
double band_center_hz(Band b) {
  switch (b) {
    case Band::Delta: return 2.0;
    case Band::Theta: return 6.0;
    case Band::Alpha: return 10.0;
    case Band::Beta: return 24.0;
    case Band::Gamma: return 38.0;
    default: return 0.0;
  }
}

Recording synth_one(const SynthSpec& spec, Label label, int subject_index) {
  const auto& powers = label == Label::HC ? spec.hc_band_powers : spec.ad_band_powers;
  const std::size_t n = static_cast<std::size_t>(std::llround(spec.duration_s * spec.fs));
  const auto montage = standard_10_20();

  Recording rec;
  rec.subject_id = std::string(label == Label::HC ? "hc" : "ad") + "_" +
                   std::to_string(subject_index);
  rec.label = label;
  rec.fs = spec.fs;
  rec.channels = montage.names;
  rec.data.assign(rec.channels.size(), std::vector<double>(n));

  const std::uint64_t subj_stream =
      static_cast<std::uint64_t>(label) * 1000003ULL + static_cast<std::uint64_t>(subject_index);
  for (std::size_t c = 0; c < rec.channels.size(); ++c) {
    Rng rng = Rng(spec.seed, subj_stream).split(c);
    auto& x = rec.data[c];
    for (const auto& [band, power] : powers) {
      if (power <= 0) continue;
      const double amp = std::sqrt(power);
      const double f = band_center_hz(band);
      const double phase = rng.uniform(0.0, 2.0 * M_PI);
      const double mod_phase = rng.uniform(0.0, 2.0 * M_PI);
      const double mod_rate = rng.uniform(0.1, 0.3);  // Hz, slow envelope
      // Slow phase wander keeps the spectral peak in band while decorrelating
      // the waveform across windows of the same recording.
      const double drift_depth = rng.uniform(M_PI, 3.0 * M_PI);
      const double drift_rate = rng.uniform(0.05, 0.15);  // Hz
      const double drift_phase = rng.uniform(0.0, 2.0 * M_PI);
      for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / spec.fs;
        const double env = 1.0 + 0.3 * std::sin(2.0 * M_PI * mod_rate * t + mod_phase);
        const double drift = drift_depth * std::sin(2.0 * M_PI * drift_rate * t + drift_phase);
        x[i] += amp * env * std::sin(2.0 * M_PI * f * t + phase + drift);
      }
    }
    if (spec.noise_sigma > 0)
      for (std::size_t i = 0; i < n; ++i) x[i] += spec.noise_sigma * rng.gaussian();
    // Quantize to float32 so files round-trip bit-exactly.
    for (auto& v : x) v = static_cast<double>(static_cast<float>(v));
  }
  return rec;
}

}  // namespace

std::vector<Recording> synthesize_recordings(const SynthSpec& spec) {
  spec.validate();
  std::vector<Recording> out;
  for (Label label : {Label::HC, Label::AD})
    for (int s = 0; s < spec.n_subjects_per_class; ++s)
      out.push_back(synth_one(spec, label, s));
  return out;
}

Manifest synthesize_dataset(const SynthSpec& spec, const std::string& out_dir) {
  const auto recs = synthesize_recordings(spec);
  std::filesystem::create_directories(out_dir);
  Manifest m;
  for (const auto& rec : recs) {
    // Manifest paths are relative to the manifest itself so the dataset
    // directory can be moved as a unit.
    const std::string file = rec.subject_id + ".eegb";
    write_recording(rec, (std::filesystem::path(out_dir) / file).string());
    m.entries.push_back({rec.subject_id, rec.label, file});
  }
  write_manifest(m, (std::filesystem::path(out_dir) / "manifest.jsonl").string());
  return m;
}

}  // namespace eegtok
