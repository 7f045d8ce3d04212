#include "qrw/report.hpp"

#include <algorithm>
#include <fstream>

#include "qrw/error.hpp"

namespace qrw {
namespace {

using Counters = std::vector<std::pair<std::string, std::uint64_t>>;

std::uint64_t& slot(Counters& counters, const std::string& name) {
  auto it = std::find_if(counters.begin(), counters.end(),
                         [&](const auto& e) { return e.first == name; });
  if (it == counters.end()) {
    counters.emplace_back(name, 0);
    return counters.back().second;
  }
  return it->second;
}

std::uint64_t lookup(const Counters& counters, const std::string& name) {
  auto it = std::find_if(counters.begin(), counters.end(),
                         [&](const auto& e) { return e.first == name; });
  return it == counters.end() ? 0 : it->second;
}

}  // namespace

FilterReport::FilterReport(std::vector<std::string> filter_names) {
  for (auto& name : filter_names) drops_.emplace_back(std::move(name), 0);
}

void FilterReport::record_drop(const std::string& filter, std::uint64_t n) {
  slot(drops_, filter) += n;
}

void FilterReport::add_note(const std::string& name, std::uint64_t n) {
  slot(notes_, name) += n;
}

std::uint64_t FilterReport::dropped(const std::string& filter) const {
  return lookup(drops_, filter);
}

std::uint64_t FilterReport::note(const std::string& name) const {
  return lookup(notes_, name);
}

std::uint64_t FilterReport::total_dropped() const {
  std::uint64_t sum = 0;
  for (const auto& [name, n] : drops_) sum += n;
  return sum;
}

void FilterReport::merge(const FilterReport& other) {
  input_ += other.input_;
  output_ += other.output_;
  for (const auto& [name, n] : other.drops_) slot(drops_, name) += n;
  for (const auto& [name, n] : other.notes_) slot(notes_, name) += n;
}

std::string FilterReport::to_text() const {
  std::string out;
  auto line = [&out](const std::string& k, std::uint64_t v) {
    out += k;
    out += '\t';
    out += std::to_string(v);
    out += '\n';
  };
  for (const auto& [name, n] : drops_) line(name, n);
  for (const auto& [name, n] : notes_) line(name, n);
  line("input", input_);
  line("output", output_);
  return out;
}

void FilterReport::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write report: " + path.string());
  out << to_text();
}

}  // namespace qrw
