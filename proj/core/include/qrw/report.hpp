#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace qrw {

/// Attrition funnel of a filtering stage. Each dropped record is attributed
/// to exactly one filter, so input == output + sum(drops) always holds.
/// Notes are informational counters outside the conservation law.
class FilterReport {
 public:
  FilterReport() = default;
  explicit FilterReport(std::vector<std::string> filter_names);

  void record_input(std::uint64_t n = 1) { input_ += n; }
  void record_kept(std::uint64_t n = 1) { output_ += n; }
  void record_drop(const std::string& filter, std::uint64_t n = 1);
  void add_note(const std::string& name, std::uint64_t n = 1);

  std::uint64_t input_count() const { return input_; }
  std::uint64_t output_count() const { return output_; }
  std::uint64_t dropped(const std::string& filter) const;
  std::uint64_t total_dropped() const;
  std::uint64_t note(const std::string& name) const;

  const std::vector<std::pair<std::string, std::uint64_t>>& drops() const { return drops_; }
  const std::vector<std::pair<std::string, std::uint64_t>>& notes() const { return notes_; }

  bool consistent() const { return input_ == output_ + total_dropped(); }

  /// Associative and commutative summation of counters; filter order is
  /// this report's order followed by unseen names from `other`.
  void merge(const FilterReport& other);

  /// One `name<TAB>count` line per filter, then notes, then `input` and
  /// `output` totals.
  std::string to_text() const;
  void save(const std::filesystem::path& path) const;

 private:
  std::uint64_t input_ = 0;
  std::uint64_t output_ = 0;
  std::vector<std::pair<std::string, std::uint64_t>> drops_;
  std::vector<std::pair<std::string, std::uint64_t>> notes_;
};

}  // namespace qrw
