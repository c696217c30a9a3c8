#include "audit_dir.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rla::tools {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::invalid_argument("cannot write " + path.string());
  out << text;
  out.close();
  if (!out) throw std::invalid_argument("short write to " + path.string());
}

AuditDir AuditDir::open(const std::string& config_file) {
  AuditDir dir;
  dir.config_path = fs::path(config_file);
  dir.root = dir.config_path.has_parent_path() ? dir.config_path.parent_path()
                                               : fs::path(".");
  dir.config = parse_config(read_file(dir.config_path), config_file);

  const fs::path contest_path = dir.root / dir.config.contest;
  dir.contest = parse_contest(read_file(contest_path), contest_path.string());

  for (const auto& [id, sc] : dir.config.strata) {
    if (sc.kind != StratumKind::comparison) continue;
    const fs::path mpath = dir.root / sc.manifest;
    dir.manifests.emplace(
        id, parse_manifest(read_file(mpath), mpath.string(), id, sc.kind));
  }
  return dir;
}

fs::path AuditDir::plan_path(long long round, const std::string& stratum) const {
  return root / "plans" /
         ("round-" + std::to_string(round) + "-" + stratum + ".csv");
}

fs::path AuditDir::round_path(long long round, const std::string& stratum) const {
  return root / "rounds" /
         ("round-" + std::to_string(round) + "-" + stratum + ".csv");
}

fs::path AuditDir::out_path(const std::string& name) const {
  return root / "out" / name;
}

std::vector<AuditEvent> AuditDir::events() const {
  const fs::path p = events_path();
  if (!fs::exists(p)) return {};
  return parse_events(read_file(p), p.string());
}

long long AuditDir::recorded_rounds() const {
  long long last = 0;
  for (const AuditEvent& e : events())
    if (e.kind == AuditEvent::Kind::round_recorded && e.round > last) last = e.round;
  return last;
}

bool AuditDir::any_plans() const {
  const fs::path plans = root / "plans";
  if (!fs::exists(plans)) return false;
  for (const auto& entry : fs::directory_iterator(plans))
    if (entry.is_regular_file()) return true;
  return false;
}

std::vector<Draw> AuditDir::plans_through(long long round,
                                          const std::string& stratum) const {
  std::vector<Draw> all;
  for (long long r = 1; r <= round; ++r) {
    const fs::path p = plan_path(r, stratum);
    if (!fs::exists(p)) continue;
    std::vector<Draw> part = parse_plan(read_file(p), p.string());
    all.insert(all.end(), std::make_move_iterator(part.begin()),
               std::make_move_iterator(part.end()));
  }
  return all;
}

namespace {

// RAII exclusive-create lock file. Single machine, single audit directory:
// O_EXCL is enough, and a crash leaves the lock visible for the operator
// to inspect rather than silently stolen.
class LockFile {
 public:
  explicit LockFile(const fs::path& path) : path_(path) {
    const int fd = ::open(path.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0)
      throw AuditStateError("decision log is locked; remove " + path.string() +
                            " if no other process is running");
    ::close(fd);
  }
  ~LockFile() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  LockFile(const LockFile&) = delete;
  LockFile& operator=(const LockFile&) = delete;

 private:
  fs::path path_;
};

}  // namespace

void append_events(const AuditDir& dir, const std::vector<AuditEvent>& add) {
  LockFile lock(dir.root / "events.lock");
  std::vector<AuditEvent> all = dir.events();
  all.insert(all.end(), add.begin(), add.end());
  write_file(dir.events_path(), emit_events(all));
}

}  // namespace rla::tools
