#pragma once

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <chrono>
#include <cstddef>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "kcsprng/ecc.hpp"
#include "kcsprng/error.hpp"
#include "kcsprng/u256.hpp"

namespace kcsprng {

/// The two published 256-bit curves the generator ships with.
inline const std::array<CurveParams, 2>& reference_curves() {
  static const std::array<CurveParams, 2> curves{{
      {U256::from_hex("EEAA0DB0A46CE48AFCD288C714939E4063E1D801C55D1118202C76798B62B483"),
       U256::from_hex("33866AAA5914BC27D9ED986D7AF431BD8FC217D8E07D5BA5E44C1A4A355C7DD4"),
       U256::from_hex("CAA0537DF123F85EC185A991B7200396B996C7921E6A7E07F08ED2A4801B0CA2"),
       U256::from_hex("3FBE1FF3CC8A893B2B018CC7D3D61961233F87F66FCB257D21805D1327426DE9"),
       U256::from_hex("C5B219E84B008A4CB36CDF05B44E95354913756FCD92251F90BFB0A4F4D84AD8"), U256(1)},
      {U256::from_hex("F2A284E729748EA8BE82173F13412FC257C42095408D706528F5D8964BF2E237"),
       U256::from_hex("B29C202E105FE4C7EE5DECAF48258BFAB2E890AF5D96DE4553D82C3EC5D03C06"),
       U256::from_hex("C36BBDD9EE50EF046EA1D4DA85300673531B323B013043F9DC97B2FDD6A807B4"),
       U256::from_hex("1216C78C1FB8707C6B7B2496226B6F13CE25347DD9283A36FA354D09E2CDF4C3"),
       U256::from_hex("A0AC0431A50C5DA5D25DCA1026946A2AADA19756ED326DA85A203B4A0B2BE342"), U256(1)},
  }};
  return curves;
}

// ---------------------------------------------------------------------------
// Verification checklist
// ---------------------------------------------------------------------------

enum class CheckStatus { pass, fail, not_checked };

inline std::string_view to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "FAIL";
    case CheckStatus::not_checked: return "not checked";
  }
  return "?";
}

struct CheckResult {
  std::string name;
  CheckStatus status;
  std::string detail;
};

struct VerificationReport {
  std::vector<CheckResult> checks;

  /// True when no implemented check failed.
  bool passed() const {
    for (const auto& c : checks)
      if (c.status == CheckStatus::fail) return false;
    return true;
  }

  const CheckResult* first_failure() const {
    for (const auto& c : checks)
      if (c.status == CheckStatus::fail) return &c;
    return nullptr;
  }

  const CheckResult* find(std::string_view name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

/// Structural checks that need no point counting. Criteria that do (rho
/// costs, twist security, embedding degree, base point order, rigidity) are
/// listed as not checked.
inline VerificationReport verify_curve(const CurveParams& c) {
  VerificationReport r;
  auto add = [&r](std::string name, bool ok, std::string detail = {}) {
    r.checks.push_back({std::move(name), ok ? CheckStatus::pass : CheckStatus::fail, std::move(detail)});
  };

  const bool prime = is_probable_prime(c.p);
  add("prime_field", prime, "Miller-Rabin, 40 rounds");
  U256 two_254;
  two_254.set_bit(254);
  add("field_size", c.p > two_254, "p > 2^254");
  add("a_range", c.a < c.p, "a < p");
  add("b_range", c.b < c.p, "b < p");
  add("gx_range", c.gx < c.p, "gx < p");
  add("gy_range", c.gy < c.p, "gy < p");

  if (c.p.is_odd() && c.p > U256(3)) {
    const EllipticCurve curve(c);
    add("discriminant", !curve.discriminant().is_zero(), "4a^3 + 27b^2 != 0 mod p");
    add("base_on_curve", curve.is_on_curve(curve.base_point()), "G satisfies y^2 = x^3 + ax + b");
  } else {
    add("discriminant", false, "modulus unusable as a field");
    add("base_on_curve", false, "modulus unusable as a field");
  }
  add("cofactor", c.h == U256(1), "h = 1");

  for (const char* name : {"rho", "twist_rho", "joint_rho", "safe_base", "safe_transfer", "safe_rigid", "safe_twist"})
    r.checks.push_back({name, CheckStatus::not_checked, "needs point counting / pairing machinery"});
  return r;
}

// ---------------------------------------------------------------------------
// Records and file format
// ---------------------------------------------------------------------------

struct CurveRecord {
  std::size_t index = 0;
  bool used = false;
  CurveParams curve;

  friend bool operator==(const CurveRecord&, const CurveRecord&) = default;
};

/// `index;status;p;a;b;h;gx;gy`, 64-digit uppercase hex, h in compact hex.
inline std::string format_record(const CurveRecord& r) {
  std::ostringstream os;
  os << r.index << ';' << (r.used ? 1 : 0) << ';' << r.curve.p.to_hex() << ';' << r.curve.a.to_hex() << ';'
     << r.curve.b.to_hex() << ';' << r.curve.h.to_hex_compact() << ';' << r.curve.gx.to_hex() << ';'
     << r.curve.gy.to_hex();
  return os.str();
}

namespace detail {

inline bool is_upper_hex(std::string_view s) {
  if (s.empty()) return false;
  for (char ch : s)
    if (!((ch >= '0' && ch <= '9') || (ch >= 'A' && ch <= 'F'))) return false;
  return true;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

inline CurveRecord parse_record(std::string_view line, std::size_t line_no) {
  auto fail = [line_no](const std::string& why) -> TableError {
    return TableError("parse error at line " + std::to_string(line_no) + ": " + why);
  };
  const auto f = detail::split(line, ';');
  if (f.size() != 8) throw fail("expected 8 ';'-separated fields, got " + std::to_string(f.size()));

  CurveRecord r;
  if (f[0].empty() || f[0].find_first_not_of("0123456789") != std::string_view::npos) throw fail("bad index");
  r.index = std::stoul(std::string(f[0]));
  if (f[1] != "0" && f[1] != "1") throw fail("status must be 0 or 1");
  r.used = f[1] == "1";

  auto wide = [&](std::string_view s, const char* what) {
    if (s.size() != 64 || !detail::is_upper_hex(s))
      throw fail(std::string(what) + " must be 64 uppercase hex digits");
    return U256::from_hex(s);
  };
  r.curve.p = wide(f[2], "p");
  r.curve.a = wide(f[3], "a");
  r.curve.b = wide(f[4], "b");
  if (!detail::is_upper_hex(f[5]) || f[5].size() > 64) throw fail("h must be uppercase hex");
  r.curve.h = U256::from_hex(f[5]);
  r.curve.gx = wide(f[6], "gx");
  r.curve.gy = wide(f[7], "gy");
  return r;
}

/// Exclusive advisory lock on `<table>.lock`, held for the object's lifetime.
class TableLock {
 public:
  TableLock() = default;

  explicit TableLock(const std::filesystem::path& table_path,
                     std::chrono::milliseconds timeout = std::chrono::milliseconds(2000)) {
    const auto lock_path = table_path.string() + ".lock";
    fd_ = ::open(lock_path.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0600);
    if (fd_ < 0) throw TableError("cannot open lock file " + lock_path + ": " + std::strerror(errno));
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      if (errno != EWOULDBLOCK || std::chrono::steady_clock::now() >= deadline) {
        ::close(fd_);
        fd_ = -1;
        throw TableError("curve table " + table_path.string() + " is locked by another process");
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
  }

  TableLock(const TableLock&) = delete;
  TableLock& operator=(const TableLock&) = delete;
  TableLock(TableLock&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  TableLock& operator=(TableLock&& o) noexcept {
    if (this != &o) {
      release();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  ~TableLock() { release(); }

  bool held() const noexcept { return fd_ >= 0; }

 private:
  void release() noexcept {
    if (fd_ >= 0) {
      ::flock(fd_, LOCK_UN);
      ::close(fd_);
      fd_ = -1;
    }
  }

  int fd_ = -1;
};

/// Result of one pair selection.
struct CurveSelection {
  CurveRecord first;
  CurveRecord second;
  bool statuses_reset = false;  // fewer than two un-used curves were left
};

enum class SelectMode {
  rotate,  // mark the pair used and persist
  frozen,  // testing only: leave statuses untouched
};

/// Ordered list of curves with used/un-used flags, optionally backed by a file.
class CurveTable {
 public:
  struct LoadOptions {
    bool verify = true;
    bool lock = true;
  };

  CurveTable() = default;

  /// Table that lives only in memory; save() is a no-op.
  static CurveTable in_memory(std::vector<CurveRecord> records) {
    CurveTable t;
    t.records_ = std::move(records);
    t.renumber();
    return t;
  }

  static CurveTable load(const std::filesystem::path& path) { return load(path, LoadOptions{}); }

  static CurveTable load(const std::filesystem::path& path, LoadOptions opts) {
    CurveTable t;
    t.path_ = path;
    if (opts.lock) t.lock_ = TableLock(path);

    std::ifstream in(path);
    if (!in) throw IoError("cannot open curve table " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      CurveRecord r = parse_record(line, line_no);
      if (r.index != t.records_.size())
        throw TableError("parse error at line " + std::to_string(line_no) + ": expected index " +
                         std::to_string(t.records_.size()));
      t.records_.push_back(r);
    }
    if (in.bad()) throw IoError("error reading curve table " + path.string());
    if (t.records_.empty()) throw TableError("parse error: curve table " + path.string() + " has no records");

    if (opts.verify) {
      for (const auto& r : t.records_) {
        const auto report = verify_curve(r.curve);
        if (const auto* bad = report.first_failure()) throw VerificationError(r.index, bad->name);
      }
    }
    return t;
  }

  /// Writes to a temporary file in the same directory, fsyncs it and renames
  /// it over the table.
  void save() const {
    if (path_.empty()) return;
    save_as(path_);
  }

  void save_as(const std::filesystem::path& path) const {
    const std::string tmp = path.string() + ".tmp." + std::to_string(::getpid());
    std::string text = "# index;status;p;a;b;h;gx;gy\n";
    for (const auto& r : records_) text += format_record(r) + "\n";

    const int fd = ::open(tmp.c_str(), O_CREAT | O_TRUNC | O_WRONLY | O_CLOEXEC, 0600);
    if (fd < 0) throw IoError("cannot create " + tmp + ": " + std::strerror(errno));
    std::size_t off = 0;
    while (off < text.size()) {
      const auto n = ::write(fd, text.data() + off, text.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        ::close(fd);
        ::unlink(tmp.c_str());
        throw IoError("write failed for " + tmp + ": " + std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
    if (::fsync(fd) != 0 || ::close(fd) != 0) {
      ::unlink(tmp.c_str());
      throw IoError("cannot flush " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
      ::unlink(tmp.c_str());
      throw IoError("cannot replace " + path.string() + ": " + ec.message());
    }
  }

  /// Picks the two lowest-indexed un-used curves and marks them used. When
  /// fewer than two are un-used, every status is reset first.
  CurveSelection select_pair(SelectMode mode = SelectMode::rotate) {
    if (records_.size() < 2)
      throw TableError("curve table needs at least 2 curves, has " + std::to_string(records_.size()));

    CurveSelection sel;
    std::vector<CurveRecord> view = records_;
    if (unused_count() < 2) {
      sel.statuses_reset = true;
      for (auto& r : view) r.used = false;
    }
    std::vector<std::size_t> picked;
    for (const auto& r : view) {
      if (!r.used) picked.push_back(r.index);
      if (picked.size() == 2) break;
    }
    sel.first = view[picked[0]];
    sel.second = view[picked[1]];

    if (mode == SelectMode::rotate) {
      view[picked[0]].used = true;
      view[picked[1]].used = true;
      const auto previous = std::exchange(records_, std::move(view));
      try {
        save();
      } catch (...) {
        records_ = previous;
        throw;
      }
    }
    return sel;
  }

  void reset_statuses() {
    const auto previous = records_;
    for (auto& r : records_) r.used = false;
    try {
      save();
    } catch (...) {
      records_ = previous;
      throw;
    }
  }

  /// Appends a curve as an un-used record (not persisted until save()).
  void append(const CurveParams& c) {
    records_.push_back({records_.size(), false, c});
  }

  std::size_t size() const noexcept { return records_.size(); }
  std::size_t unused_count() const noexcept {
    std::size_t n = 0;
    for (const auto& r : records_) n += r.used ? 0 : 1;
    return n;
  }
  const std::vector<CurveRecord>& records() const noexcept { return records_; }
  const CurveRecord& record(std::size_t i) const { return records_.at(i); }
  const std::filesystem::path& path() const noexcept { return path_; }
  bool locked() const noexcept { return lock_.held(); }

  /// Drops the file lock; later saves still go to the same path.
  void unlock() noexcept { lock_ = TableLock(); }

  void set_used(std::size_t i, bool used) { records_.at(i).used = used; }

 private:
  void renumber() {
    for (std::size_t i = 0; i < records_.size(); ++i) records_[i].index = i;
  }

  std::vector<CurveRecord> records_;
  std::filesystem::path path_;
  TableLock lock_;
};

inline CurveTable load_table(const std::filesystem::path& path) { return CurveTable::load(path); }
inline void save_table(const CurveTable& table) { table.save(); }
inline CurveSelection select_pair(CurveTable& table) { return table.select_pair(); }
inline void reset_statuses(CurveTable& table) { table.reset_statuses(); }

/// Random curve through a random point over a random 256-bit prime field.
/// Only for tests and demo tables: these curves carry no security vetting,
/// and h = 1 is asserted, not verified.
inline CurveParams synthesize_placeholder_curve(std::mt19937_64& rng) {
  auto random_u256 = [&rng] {
    U256 v;
    for (auto& l : v.limb) l = rng();
    return v;
  };
  U256 p = random_u256();
  p.set_bit(255);
  p.limb[0] |= 1U;
  while (!is_probable_prime(p)) p = p + U256(2);

  const PrimeField f(p);
  while (true) {
    CurveParams c;
    c.p = p;
    c.a = mod(random_u256(), p);
    c.gx = mod(random_u256(), p);
    c.gy = mod(random_u256(), p);
    const U256 x3 = f.mul(f.mul(c.gx, c.gx), c.gx);
    c.b = f.sub(f.sub(f.mul(c.gy, c.gy), x3), f.mul(c.a, c.gx));
    c.h = U256(1);
    if (!EllipticCurve(c).discriminant().is_zero()) return c;
  }
}

}  // namespace kcsprng
