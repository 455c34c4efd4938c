#include "fdl/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

#include "fdl/errors.hpp"
#include "fdl/parallel.hpp"

namespace fdl {

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::BaseOrder: return "BaseOrder";
    case ErrorKind::ParityImpossible: return "ParityImpossible";
    case ErrorKind::SumMismatch: return "SumMismatch";
    case ErrorKind::RangeViolation: return "RangeViolation";
    case ErrorKind::BadShape: return "BadShape";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::AlphaOutOfRange: return "AlphaOutOfRange";
    case ErrorKind::ZeroIncrement: return "ZeroIncrement";
    case ErrorKind::MismatchedLevel: return "MismatchedLevel";
    case ErrorKind::DegenerateNorm: return "DegenerateNorm";
    case ErrorKind::NotAdmissible: return "NotAdmissible";
    case ErrorKind::MismatchedOrder: return "MismatchedOrder";
    case ErrorKind::TauZero: return "TauZero";
    case ErrorKind::NotContained: return "NotContained";
    case ErrorKind::BadConfig: return "BadConfig";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::NanDetected: return "NanDetected";
    case ErrorKind::Divergence: return "Divergence";
  }
  return "UnknownError";
}

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::NonConvergence:
    case ErrorKind::NanDetected:
    case ErrorKind::Divergence:
      return 2;
    default:
      return 1;
  }
}

int thread_count() {
  static const int n = [] {
    unsigned hw = std::thread::hardware_concurrency();
    int count = static_cast<int>(hw == 0 ? 1 : hw);
    if (count > 8) count = 8;
    if (const char* env = std::getenv("FDL_THREADS")) {
      int requested = std::atoi(env);
      if (requested >= 1) count = requested;
    }
    return count;
  }();
  return n;
}

namespace detail {

void run_chunked(std::int64_t chunks,
                 const std::function<void(std::int64_t)>& task) {
  if (chunks <= 0) return;
  const int workers = std::min<std::int64_t>(thread_count(), chunks);
  if (workers <= 1) {
    for (std::int64_t c = 0; c < chunks; ++c) task(c);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const std::int64_t c = next.fetch_add(1);
        if (c >= chunks) return;
        task(c);
      }
    });
  for (auto& t : pool) t.join();
}

}  // namespace detail
}  // namespace fdl

namespace fdl::io {

std::string format_double(double x) {
  char buf[64];
  // %.17g always round-trips; fall back from shorter forms when they do.
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == x) return buf;
  }
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void atomic_write_bytes(const std::string& path, const void* data,
                        std::size_t size) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::IoFailure, "cannot open " + tmp);
    out.write(static_cast<const char*>(data),
              static_cast<std::streamsize>(size));
    if (!out) fail(ErrorKind::IoFailure, "short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    fail(ErrorKind::IoFailure, "rename to " + path + " failed");
}

void atomic_write(const std::string& path, const std::string& contents) {
  atomic_write_bytes(path, contents.data(), contents.size());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoFailure, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<unsigned char> read_file_bytes(const std::string& path) {
  std::string s = read_file(path);
  return std::vector<unsigned char>(s.begin(), s.end());
}

std::string fnv1a_hex(const void* data, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string hash_file(const std::string& path) {
  std::string s = read_file(path);
  return fnv1a_hex(s.data(), s.size());
}

std::string iso8601_now() {
  std::time_t t = std::time(nullptr);
  std::tm tm_utc;
  gmtime_r(&t, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

}  // namespace fdl::io
