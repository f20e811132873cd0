#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace mpcc {

enum class Algorithm { kRelaxation, kPenalty };

enum class OptionKind { kDouble, kInt, kBool, kEnum };

struct OptionInfo {
  std::string name;
  OptionKind kind;
  std::string default_relaxation;
  std::string default_penalty;
  std::vector<std::string> choices;
  std::string description;
};

/// Every registered option, in display order.
const std::vector<OptionInfo>& option_table();
const OptionInfo* find_option(std::string_view name);

/// String-keyed option overrides. Keys and values are validated on set;
/// unset keys resolve to the algorithm-specific default on read.
class Options {
 public:
  void set(std::string_view key, std::string_view value);
  /// Parses "key=value".
  void set(std::string_view assignment);
  /// Reads "key = value" lines; '#' starts a comment.
  void load_file(const std::string& path);

  bool is_set(std::string_view key) const;
  std::string raw(std::string_view key, Algorithm algorithm) const;
  double get_double(std::string_view key, Algorithm algorithm) const;
  int get_int(std::string_view key, Algorithm algorithm) const;
  bool get_bool(std::string_view key, Algorithm algorithm) const;
  std::string get_enum(std::string_view key, Algorithm algorithm) const;

  const std::map<std::string, std::string>& overrides() const {
    return values_;
  }

 private:
  std::map<std::string, std::string> values_;
};

std::string_view to_string(Algorithm algorithm);
Algorithm parse_algorithm(std::string_view name);

}  // namespace mpcc
