#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "flowscope/error.hpp"
#include "flowscope/ingest.hpp"

// Layout (all integers little-endian):
//   magic "FLSTORE1" | u32 version | u64 session_count | session*
//   session: str id | u64 n_events | event* | u64 n_glances | glance* | u64 n_driving | sample*
//   event:   i64 ts | str ui_element | u8 gesture
//   glance:  i64 start | i64 end | str region
//   sample:  i64 ts | f64 speed | f64 steering
//   str:     u32 byte length | bytes

namespace flowscope::ingest {

namespace {

constexpr std::array<char, 8> kMagic = {'F', 'L', 'S', 'T', 'O', 'R', 'E', '1'};
constexpr std::uint32_t kStoreVersion = 1;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  template <typename T>
  void uint(T value) {
    std::array<char, sizeof(T)> buf{};
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
    out_.write(buf.data(), buf.size());
  }
  void i64(std::int64_t v) { uint(static_cast<std::uint64_t>(v)); }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    uint(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  template <typename T>
  T uint() {
    std::array<unsigned char, sizeof(T)> buf{};
    read(reinterpret_cast<char*>(buf.data()), buf.size());
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(buf[i]) << (8 * i);
    return value;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(uint<std::uint64_t>()); }
  double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }
  std::string str() {
    const auto n = uint<std::uint32_t>();
    std::string s(n, '\0');
    read(s.data(), n);
    return s;
  }
  void read(char* dst, std::size_t n) {
    if (!in_.read(dst, static_cast<std::streamsize>(n))) throw FormatError("truncated store");
  }
  std::uint64_t count() {
    const auto n = uint<std::uint64_t>();
    // Reject absurd counts before allocating.
    if (n > (std::uint64_t{1} << 40)) throw FormatError("corrupt store: implausible record count");
    return n;
  }

 private:
  std::istream& in_;
};

}  // namespace

void save_store(const SessionStore& store, std::ostream& out) {
  out.write(kMagic.data(), kMagic.size());
  Writer w(out);
  w.uint(kStoreVersion);
  w.uint(static_cast<std::uint64_t>(store.size()));
  for (const auto& [id, s] : store.sessions()) {
    w.str(id);
    w.uint(static_cast<std::uint64_t>(s.events.size()));
    for (const auto& e : s.events) {
      w.i64(e.ts);
      w.str(e.ui_element);
      w.uint(static_cast<std::uint8_t>(e.gesture));
    }
    w.uint(static_cast<std::uint64_t>(s.glances.size()));
    for (const auto& g : s.glances) {
      w.i64(g.start);
      w.i64(g.end);
      w.str(g.region_id);
    }
    w.uint(static_cast<std::uint64_t>(s.driving.size()));
    for (const auto& d : s.driving) {
      w.i64(d.ts);
      w.f64(d.speed_kmh);
      w.f64(d.steering_deg);
    }
  }
}

SessionStore load_store(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw FormatError("not a flowscope store");
  Reader r(in);
  if (const auto v = r.uint<std::uint32_t>(); v != kStoreVersion) {
    throw FormatError("unsupported store version " + std::to_string(v));
  }
  SessionMap sessions;
  const auto n_sessions = r.count();
  for (std::uint64_t k = 0; k < n_sessions; ++k) {
    Session s;
    s.id = r.str();
    const auto n_events = r.count();
    s.events.reserve(n_events);
    for (std::uint64_t i = 0; i < n_events; ++i) {
      InteractionEvent e;
      e.session_id = s.id;
      e.ts = r.i64();
      e.ui_element = r.str();
      const auto g = r.uint<std::uint8_t>();
      if (g > static_cast<std::uint8_t>(Gesture::other)) throw FormatError("corrupt store: bad gesture code");
      e.gesture = static_cast<Gesture>(g);
      s.events.push_back(std::move(e));
    }
    const auto n_glances = r.count();
    s.glances.reserve(n_glances);
    for (std::uint64_t i = 0; i < n_glances; ++i) {
      GlanceRecord g;
      g.session_id = s.id;
      g.start = r.i64();
      g.end = r.i64();
      g.region_id = r.str();
      s.glances.push_back(std::move(g));
    }
    const auto n_driving = r.count();
    s.driving.reserve(n_driving);
    for (std::uint64_t i = 0; i < n_driving; ++i) {
      DrivingSample d;
      d.session_id = s.id;
      d.ts = r.i64();
      d.speed_kmh = r.f64();
      d.steering_deg = r.f64();
      s.driving.push_back(std::move(d));
    }
    auto id = s.id;
    if (!sessions.emplace(std::move(id), std::move(s)).second) throw FormatError("corrupt store: duplicate session");
  }
  return SessionStore(std::move(sessions));
}

void save_store_file(const SessionStore& store, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write store: " + path.string());
  save_store(store, out);
  if (!out) throw Error("failed writing store: " + path.string());
}

SessionStore load_store_file(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) throw NotFoundError("store not found: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open store: " + path.string());
  return load_store(in);
}

}  // namespace flowscope::ingest
