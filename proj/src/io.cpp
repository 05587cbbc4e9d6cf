#include "sparsepr/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "sparsepr/error.hpp"

namespace sparsepr {

Format parse_format(const std::string& name) {
  if (name == "csv") return Format::csv;
  if (name == "json") return Format::json;
  throw Error(Errc::invalid_config, "unknown format '" + name + "' (expected csv or json)");
}

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

nlohmann::json real_json(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

template <class Records>
void write_to_path(const Records& records, const std::string& path, Format format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot open '" + path + "' for writing");
  write_records(records, out, format);
  out.flush();
  if (!out) throw Error(Errc::io_error, "write to '" + path + "' failed");
}

}  // namespace

void write_records(const std::vector<ExperimentRecord>& records, std::ostream& out, Format format) {
  if (format == Format::csv) {
    out << kExperimentHeader << '\n';
    for (const auto& r : records) {
      out << r.trial << ',' << csv_field(r.link) << ',' << r.p << ',' << r.s << ',' << r.n << ','
          << format_real(r.inv_snr) << ',' << format_real(r.cosine_error) << ',' << format_real(r.dist) << ','
          << r.iterations << ',' << (r.support_ok_all_iters ? "true" : "false") << ',' << r.seed << '\n';
    }
    return;
  }
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records) {
    nlohmann::json o = {{"trial", r.trial},
                        {"link", r.link},
                        {"p", r.p},
                        {"s", r.s},
                        {"n", r.n},
                        {"inv_snr", real_json(r.inv_snr)},
                        {"cosine_error", real_json(r.cosine_error)},
                        {"dist", real_json(r.dist)},
                        {"iterations", r.iterations},
                        {"support_ok_all_iters", r.support_ok_all_iters},
                        {"seed", r.seed}};
    if (!r.error.empty()) o["error"] = r.error;
    arr.push_back(std::move(o));
  }
  out << arr.dump(2) << '\n';
}

void write_records(const std::vector<ConvergenceRecord>& records, std::ostream& out, Format format) {
  if (format == Format::csv) {
    out << kConvergenceHeader << '\n';
    for (const auto& r : records)
      out << r.trial << ',' << csv_field(r.link) << ',' << r.t << ',' << format_real(r.err_t) << ','
          << format_real(r.log_gap) << '\n';
    return;
  }
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records)
    arr.push_back({{"trial", r.trial},
                   {"link", r.link},
                   {"t", r.t},
                   {"err_t", real_json(r.err_t)},
                   {"log_gap", real_json(r.log_gap)}});
  out << arr.dump(2) << '\n';
}

void write_records(const std::vector<ExperimentRecord>& records, const std::string& path, Format format) {
  write_to_path(records, path, format);
}

void write_records(const std::vector<ConvergenceRecord>& records, const std::string& path, Format format) {
  write_to_path(records, path, format);
}

namespace {

class PgmReader {
 public:
  explicit PgmReader(const std::string& bytes) : b_(bytes) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(Errc::parse_error, "pgm: " + what + " at byte offset " + std::to_string(pos_));
  }

  void skip_space_and_comments() {
    while (pos_ < b_.size()) {
      const auto c = static_cast<unsigned char>(b_[pos_]);
      if (std::isspace(c)) {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  unsigned long read_uint(const char* field) {
    skip_space_and_comments();
    if (pos_ >= b_.size()) fail(std::string("unexpected end of file reading ") + field);
    if (!std::isdigit(static_cast<unsigned char>(b_[pos_]))) fail(std::string("expected ") + field);
    unsigned long v = 0;
    while (pos_ < b_.size() && std::isdigit(static_cast<unsigned char>(b_[pos_]))) {
      v = v * 10 + static_cast<unsigned long>(b_[pos_] - '0');
      if (v > 1'000'000'000UL) fail(std::string(field) + " too large");
      ++pos_;
    }
    return v;
  }

  std::size_t& pos() { return pos_; }
  const std::string& bytes() const { return b_; }

 private:
  const std::string& b_;
  std::size_t pos_ = 0;
};

}  // namespace

Mat parse_pgm(const std::string& bytes) {
  PgmReader r(bytes);
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) r.fail("bad magic number (expected P2 or P5)");
  const bool binary = bytes[1] == '5';
  r.pos() = 2;
  const unsigned long width = r.read_uint("width");
  const unsigned long height = r.read_uint("height");
  const std::size_t maxval_pos = r.pos();
  const unsigned long maxval = r.read_uint("maxval");
  if (width == 0 || height == 0) r.fail("zero image dimension");
  if (maxval == 0 || maxval > 255) {
    r.pos() = maxval_pos;
    r.fail("maxval " + std::to_string(maxval) + " outside 1..255");
  }

  Mat m(height, width);
  const double scale = 1.0 / static_cast<double>(maxval);
  if (binary) {
    if (r.pos() >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[r.pos()])))
      r.fail("missing whitespace before binary payload");
    ++r.pos();
    const std::size_t need = width * height;
    if (bytes.size() - r.pos() < need) {
      r.pos() = bytes.size();
      r.fail("truncated payload (" + std::to_string(need) + " bytes expected)");
    }
    for (std::size_t k = 0; k < need; ++k) {
      const auto v = static_cast<unsigned char>(bytes[r.pos() + k]);
      if (v > maxval) {
        r.pos() += k;
        r.fail("sample exceeds maxval");
      }
      m.data()[k] = v * scale;
    }
  } else {
    for (std::size_t k = 0; k < width * height; ++k) {
      const unsigned long v = r.read_uint("sample");
      if (v > maxval) r.fail("sample exceeds maxval");
      m.data()[k] = static_cast<double>(v) * scale;
    }
  }
  return m;
}

Mat load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open '" + path + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_pgm(bytes);
}

void write_pgm(const Mat& image, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot open '" + path + "' for writing");
  out << "P5\n" << image.cols() << ' ' << image.rows() << "\n255\n";
  for (double v : image.data()) {
    const double c = std::min(1.0, std::max(0.0, std::isfinite(v) ? v : 0.0));
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(c * 255.0))));
  }
  if (!out) throw Error(Errc::io_error, "write to '" + path + "' failed");
}

}  // namespace sparsepr
