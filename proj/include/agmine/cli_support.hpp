#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace agmine {

// ---------------------------------------------------------------------------
// Input/output helpers shared by the command-line tool and its tests.
// Inputs travel either as a directory of raw files (one input per file) or as
// a text file with one escaped input per line.
// ---------------------------------------------------------------------------

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Escapes an input string for one-per-line storage: backslash, newline, tab,
/// carriage return and non-printable bytes become escape sequences.
inline std::string escape_input(const std::string& s) {
  std::string out;
  for (unsigned char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (c < 0x20 || c == 0x7f) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\x%02x", c);
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  return out;
}

inline std::string unescape_input(const std::string& s) {
  std::string out;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out += s[i];
      continue;
    }
    if (i + 1 >= s.size()) throw IoError("dangling backslash in escaped input");
    char c = s[++i];
    switch (c) {
      case '\\': out += '\\'; break;
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      case 'r': out += '\r'; break;
      case 'x': {
        if (i + 2 >= s.size()) throw IoError("truncated \\x escape in input");
        auto hex = [](char h) -> int {
          if (h >= '0' && h <= '9') return h - '0';
          if (h >= 'a' && h <= 'f') return h - 'a' + 10;
          if (h >= 'A' && h <= 'F') return h - 'A' + 10;
          throw IoError("invalid \\x escape in input");
        };
        out += static_cast<char>(hex(s[i + 1]) * 16 + hex(s[i + 2]));
        i += 2;
        break;
      }
      default:
        throw IoError(std::string("unknown escape '\\") + c + "' in input");
    }
  }
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path);
  f << content;
}

/// Loads inputs from a directory (each regular file is one raw input, in
/// filename order, with at most one trailing newline stripped) or from a file
/// (one escaped input per line).
inline std::vector<std::string> load_inputs(const std::string& path) {
  namespace fs = std::filesystem;
  std::vector<std::string> inputs;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(path))
      if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      std::string raw = read_file(f.string());
      if (!raw.empty() && raw.back() == '\n') raw.pop_back();
      inputs.push_back(std::move(raw));
    }
    return inputs;
  }
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) inputs.push_back(unescape_input(line));
  return inputs;
}

/// Writes inputs into a directory as input_NNN.txt files (raw bytes).
inline void write_input_dir(const std::string& dir, const std::vector<std::string>& inputs) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  for (size_t i = 0; i < inputs.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "input_%03zu.txt", i);
    write_file((fs::path(dir) / name).string(), inputs[i]);
  }
}

}  // namespace agmine
