#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sparsepr/experiments.hpp"
#include "sparsepr/linalg.hpp"

namespace sparsepr {

enum class Format { csv, json };

/// Parses "csv" or "json"; throws invalid-config otherwise.
Format parse_format(const std::string& name);

/// %.17g rendering; NaN and infinities as "nan", "inf", "-inf".
std::string format_real(double value);

inline constexpr const char* kExperimentHeader =
    "trial,link,p,s,n,inv_snr,cosine_error,dist,iterations,support_ok_all_iters,seed";
inline constexpr const char* kConvergenceHeader = "trial,link,t,err_t,log_gap";

void write_records(const std::vector<ExperimentRecord>& records, std::ostream& out, Format format);
void write_records(const std::vector<ConvergenceRecord>& records, std::ostream& out, Format format);

/// Writes to `path`; throws io-error when the file cannot be written.
void write_records(const std::vector<ExperimentRecord>& records, const std::string& path, Format format);
void write_records(const std::vector<ConvergenceRecord>& records, const std::string& path, Format format);

/// P2 or P5 grayscale image with maxval <= 255, scaled to [0, 1].
/// Throws parse-error naming the byte offset of the problem.
Mat load_pgm(const std::string& path);
Mat parse_pgm(const std::string& bytes);

/// Binary P5 with values clamped to [0, 1] and scaled to 0..255.
void write_pgm(const Mat& image, const std::string& path);

}  // namespace sparsepr
