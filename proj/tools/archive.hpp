// Segment archive: one binary tensor file per subject plus an index.json.
#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eegtok/dsp.hpp"

namespace eegtok::archive {

namespace detail {

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("segment archive: truncated file");
  return v;
}

}  // namespace detail

inline void write_subject_segments(const std::vector<Segment>& segs, const std::string& path) {
  if (segs.empty()) throw std::invalid_argument("segment archive: empty segment list");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os.write("SEGB", 4);
  detail::put<std::uint16_t>(os, 1);  // version
  detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(segs.size()));
  detail::put<std::uint16_t>(os, static_cast<std::uint16_t>(segs[0].data.size()));
  detail::put<std::uint16_t>(os, static_cast<std::uint16_t>(segs[0].data[0].size()));
  detail::put<std::uint8_t>(os, static_cast<std::uint8_t>(segs[0].label));
  detail::put<std::uint8_t>(os, static_cast<std::uint8_t>(segs[0].band));
  for (const auto& s : segs)
    for (const auto& ch : s.data)
      for (double v : ch) detail::put<float>(os, static_cast<float>(v));
  if (!os) throw std::runtime_error("segment archive: write failed: " + path);
}

inline std::vector<Segment> read_subject_segments(const std::string& path,
                                                  const std::string& subject_id) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "SEGB", 4) != 0)
    throw std::runtime_error("segment archive: bad magic in " + path);
  if (detail::get<std::uint16_t>(is) != 1)
    throw std::runtime_error("segment archive: unsupported version");
  const auto n = detail::get<std::uint32_t>(is);
  const auto C = detail::get<std::uint16_t>(is);
  const auto L = detail::get<std::uint16_t>(is);
  const auto label = static_cast<Label>(detail::get<std::uint8_t>(is));
  const auto band = static_cast<Band>(detail::get<std::uint8_t>(is));
  std::vector<Segment> segs(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    auto& s = segs[i];
    s.subject_id = subject_id;
    s.label = label;
    s.band = band;
    s.index = i;
    s.data.assign(C, std::vector<double>(L));
    for (auto& ch : s.data)
      for (auto& v : ch) v = static_cast<double>(detail::get<float>(is));
  }
  return segs;
}

// Writes per-subject SEGB files plus index.json into dir.
inline void write_archive(const std::vector<std::vector<Segment>>& per_subject,
                          const std::string& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json index = nlohmann::json::array();
  for (const auto& segs : per_subject) {
    const std::string file = segs[0].subject_id + ".segb";
    write_subject_segments(segs, dir + "/" + file);
    index.push_back({{"subject_id", segs[0].subject_id},
                     {"label", static_cast<int>(segs[0].label)},
                     {"band", band_name(segs[0].band)},
                     {"file", file},
                     {"n_segments", segs.size()},
                     {"n_channels", segs[0].data.size()},
                     {"segment_length", segs[0].data[0].size()}});
  }
  std::ofstream os(dir + "/index.json", std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + dir + "/index.json");
  os << index.dump(2) << "\n";
}

inline std::vector<Segment> read_archive(const std::string& dir) {
  std::ifstream is(dir + "/index.json");
  if (!is) throw std::runtime_error("cannot open: " + dir + "/index.json");
  nlohmann::json index;
  is >> index;
  std::vector<Segment> all;
  for (const auto& entry : index) {
    auto segs = read_subject_segments(dir + "/" + entry.at("file").get<std::string>(),
                                      entry.at("subject_id").get<std::string>());
    all.insert(all.end(), std::make_move_iterator(segs.begin()),
               std::make_move_iterator(segs.end()));
  }
  return all;
}

}  // namespace eegtok::archive
