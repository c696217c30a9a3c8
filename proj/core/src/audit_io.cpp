#include "rlakit/audit_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <limits>
#include <set>

namespace rla {

namespace {

std::string trim(const std::string& s) {
  const size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  size_t start = 0;
  while (start <= text.size()) {
    const size_t nl = text.find('\n', start);
    if (nl == std::string::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  for (std::string& l : lines)
    if (!l.empty() && l.back() == '\r') l.pop_back();
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t c = line.find(',', start);
    if (c == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, c - start));
    start = c + 1;
  }
}

void check_field(const std::string& s) {
  if (s.find(',') != std::string::npos || s.find('\n') != std::string::npos)
    throw std::invalid_argument("emit: field contains a delimiter: '" + s + "'");
}

struct Rows {
  std::vector<std::vector<std::string>> fields;
  std::vector<long long> line;
};

Rows read_csv(const std::string& text, const std::string& file,
              const std::string& schema, const std::string& header) {
  const std::vector<std::string> lines = split_lines(text);
  if (lines.empty() || lines[0] != "schema:" + schema)
    throw ParseError(file, 1, "expected schema line 'schema:" + schema + "'");
  if (lines.size() < 2 || lines[1] != header)
    throw ParseError(file, 2, "expected column header '" + header + "'");
  const size_t columns =
      static_cast<size_t>(std::count(header.begin(), header.end(), ',')) + 1;

  Rows out;
  for (size_t i = 2; i < lines.size(); ++i) {
    if (lines[i].empty()) throw ParseError(file, static_cast<long long>(i + 1), "blank line inside table");
    std::vector<std::string> f = split_fields(lines[i]);
    if (f.size() != columns)
      throw ParseError(file, static_cast<long long>(i + 1),
                       "expected " + std::to_string(columns) + " fields, found " +
                           std::to_string(f.size()));
    out.fields.push_back(std::move(f));
    out.line.push_back(static_cast<long long>(i + 1));
  }
  return out;
}

}  // namespace

ParseError::ParseError(std::string file, long long line, const std::string& message)
    : std::invalid_argument(file + ":" + std::to_string(line) + ": " + message),
      file_(std::move(file)),
      line_(line) {}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string format_ratio(const Ratio& r) { return r.str(); }

long long parse_integer(const std::string& field, const std::string& file,
                        long long line) {
  long long v = 0;
  const char* b = field.data();
  const char* e = b + field.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e)
    throw ParseError(file, line, "not an integer: '" + field + "'");
  return v;
}

double parse_double(const std::string& field, const std::string& file,
                    long long line) {
  double v = 0.0;
  const char* b = field.data();
  const char* e = b + field.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e)
    throw ParseError(file, line, "not a number: '" + field + "'");
  return v;
}

Ratio parse_ratio(const std::string& field, const std::string& file, long long line) {
  if (field.empty()) throw ParseError(file, line, "empty ratio");
  const size_t slash = field.find('/');
  if (slash != std::string::npos) {
    const long long num = parse_integer(field.substr(0, slash), file, line);
    const long long den = parse_integer(field.substr(slash + 1), file, line);
    if (den == 0) throw ParseError(file, line, "ratio with zero denominator: '" + field + "'");
    return Ratio(num, den);
  }

  const bool neg = field[0] == '-';
  const std::string body =
      (field[0] == '-' || field[0] == '+') ? field.substr(1) : field;
  const size_t dot = body.find('.');
  const std::string int_part = dot == std::string::npos ? body : body.substr(0, dot);
  const std::string frac_part = dot == std::string::npos ? "" : body.substr(dot + 1);
  if (int_part.empty() && frac_part.empty())
    throw ParseError(file, line, "not a ratio: '" + field + "'");
  for (const std::string* part : {&int_part, &frac_part})
    for (char c : *part)
      if (!std::isdigit(static_cast<unsigned char>(c)))
        throw ParseError(file, line, "not a ratio: '" + field + "'");
  if (frac_part.size() > 18)
    throw ParseError(file, line, "unsupported decimal precision: '" + field + "'");

  long long den = 1;
  for (size_t i = 0; i < frac_part.size(); ++i) den *= 10;
  const long long whole =
      int_part.empty() ? 0 : parse_integer(int_part, file, line);
  const long long frac =
      frac_part.empty() ? 0 : parse_integer(frac_part, file, line);
  const __int128 magnitude = static_cast<__int128>(whole) * den + frac;
  if (magnitude > std::numeric_limits<long long>::max())
    throw ParseError(file, line, "ratio out of range: '" + field + "'");
  const long long num = static_cast<long long>(magnitude);
  return Ratio(neg ? -num : num, den);
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

struct ConfigValue {
  std::string value;
  long long line = 0;
};

const char* kRuleNames[] = {"full-count", "adjust-threshold"};

}  // namespace

AuditConfig parse_config(const std::string& text, const std::string& filename) {
  std::map<std::string, ConfigValue> kv;
  const std::vector<std::string> lines = split_lines(text);
  for (size_t i = 0; i < lines.size(); ++i) {
    const long long line_no = static_cast<long long>(i + 1);
    const std::string line = trim(lines[i]);
    if (line.empty() || line[0] == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(filename, line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(filename, line_no, "empty key");
    if (!kv.emplace(key, ConfigValue{value, line_no}).second)
      throw ParseError(filename, line_no, "duplicate key '" + key + "'");
  }

  auto take = [&](const std::string& key) -> ConfigValue {
    auto it = kv.find(key);
    if (it == kv.end())
      throw ParseError(filename, 0, "missing required key '" + key + "'");
    ConfigValue v = it->second;
    kv.erase(it);
    return v;
  };
  auto take_optional = [&](const std::string& key, const std::string& fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return ConfigValue{fallback, 0};
    ConfigValue v = it->second;
    kv.erase(it);
    return v;
  };

  AuditConfig cfg;
  ConfigValue v = take("contest");
  if (v.value.empty()) throw ParseError(filename, v.line, "contest path is empty");
  cfg.contest = v.value;
  v = take("seed");
  if (v.value.empty()) throw ParseError(filename, v.line, "seed is empty");
  cfg.seed = v.value;

  v = take("alpha");
  cfg.allocation.alpha = parse_double(v.value, filename, v.line);
  v = take("alpha.comparison");
  cfg.allocation.alpha1 = parse_double(v.value, filename, v.line);
  v = take("alpha.polling");
  cfg.allocation.alpha2 = parse_double(v.value, filename, v.line);
  v = take("lambda.comparison");
  cfg.allocation.lambda1 = parse_ratio(v.value, filename, v.line);

  v = take("rule");
  if (v.value == "full-count") {
    cfg.allocation.rule = EscalationRule::auto_full_count;
  } else if (v.value == "adjust-threshold") {
    cfg.allocation.rule = EscalationRule::adjust_threshold;
  } else {
    throw ParseError(filename, v.line,
                     "rule must be 'full-count' or 'adjust-threshold'");
  }

  v = take_optional("comparison.test", "kaplan-markov");
  if (v.value == "kaplan-wald") {
    cfg.use_kaplan_wald = true;
  } else if (v.value != "kaplan-markov") {
    throw ParseError(filename, v.line,
                     "comparison.test must be 'kaplan-markov' or 'kaplan-wald'");
  }
  v = take_optional("comparison.gamma", "");
  if (!v.value.empty())
    cfg.kaplan_wald_gamma = parse_double(v.value, filename, v.line);

  v = take_optional("comparison.bound", "simple");
  if (v.value == "sharp") {
    cfg.bound_mode = BoundMode::sharp;
  } else if (v.value != "simple") {
    throw ParseError(filename, v.line, "comparison.bound must be 'simple' or 'sharp'");
  }
  v = take_optional("comparison.inflation", "");
  if (!v.value.empty())
    cfg.bound_inflation = parse_ratio(v.value, filename, v.line);

  v = take_optional("polling.method", "tri");
  if (v.value == "conditional") {
    cfg.polling_method = PollingMethod::conditional_hypergeometric;
  } else if (v.value != "tri") {
    throw ParseError(filename, v.line, "polling.method must be 'tri' or 'conditional'");
  }
  v = take_optional("polling.depth", "standard");
  if (v.value == "exhaustive") {
    cfg.search_depth = SearchDepth::exhaustive;
  } else if (v.value != "standard") {
    throw ParseError(filename, v.line,
                     "polling.depth must be 'standard' or 'exhaustive'");
  }
  v = take_optional("grid", "100");
  cfg.grid_points = static_cast<int>(parse_integer(v.value, filename, v.line));
  if (cfg.grid_points < 2)
    throw ParseError(filename, v.line, "grid must be at least 2");

  // Remaining keys must all be stratum definitions.
  std::set<std::string> stratum_ids;
  for (const auto& [key, val] : kv) {
    if (key.rfind("stratum.", 0) != 0)
      throw ParseError(filename, val.line, "unknown key '" + key + "'");
    const size_t second_dot = key.find('.', 8);
    if (second_dot == std::string::npos || second_dot == 8)
      throw ParseError(filename, val.line, "unknown key '" + key + "'");
    stratum_ids.insert(key.substr(8, second_dot - 8));
  }
  for (const std::string& id : stratum_ids) {
    StratumConfig sc;
    auto kind_it = kv.find("stratum." + id + ".kind");
    if (kind_it == kv.end())
      throw ParseError(filename, 0, "missing key 'stratum." + id + ".kind'");
    if (kind_it->second.value == "comparison") {
      sc.kind = StratumKind::comparison;
    } else if (kind_it->second.value == "polling") {
      sc.kind = StratumKind::polling;
    } else {
      throw ParseError(filename, kind_it->second.line,
                       "stratum kind must be 'comparison' or 'polling'");
    }
    kv.erase(kind_it);
    auto manifest_it = kv.find("stratum." + id + ".manifest");
    if (sc.kind == StratumKind::comparison) {
      if (manifest_it == kv.end() || manifest_it->second.value.empty())
        throw ParseError(filename, 0, "missing key 'stratum." + id + ".manifest'");
      sc.manifest = manifest_it->second.value;
      kv.erase(manifest_it);
    } else if (manifest_it != kv.end()) {
      throw ParseError(filename, manifest_it->second.line,
                       "polling stratum '" + id + "' takes no manifest");
    }
    cfg.strata.emplace(id, std::move(sc));
  }
  for (const auto& [key, val] : kv)
    throw ParseError(filename, val.line, "unknown key '" + key + "'");
  if (cfg.strata.empty()) throw ParseError(filename, 0, "no strata defined");
  return cfg;
}

std::string emit_config(const AuditConfig& cfg) {
  for (const auto& [id, sc] : cfg.strata) {
    check_field(id);
    check_field(sc.manifest);
  }
  std::string out;
  out += "contest = " + cfg.contest + "\n";
  out += "seed = " + cfg.seed + "\n";
  out += "alpha = " + format_double(cfg.allocation.alpha) + "\n";
  out += "alpha.comparison = " + format_double(cfg.allocation.alpha1) + "\n";
  out += "alpha.polling = " + format_double(cfg.allocation.alpha2) + "\n";
  out += "lambda.comparison = " + format_ratio(cfg.allocation.lambda1) + "\n";
  out += std::string("rule = ") +
         kRuleNames[cfg.allocation.rule == EscalationRule::adjust_threshold] + "\n";
  for (const auto& [id, sc] : cfg.strata) {
    out += "stratum." + id + ".kind = " +
           (sc.kind == StratumKind::comparison ? "comparison" : "polling") + "\n";
    if (sc.kind == StratumKind::comparison)
      out += "stratum." + id + ".manifest = " + sc.manifest + "\n";
  }
  out += std::string("comparison.test = ") +
         (cfg.use_kaplan_wald ? "kaplan-wald" : "kaplan-markov") + "\n";
  out += "comparison.gamma = " + format_double(cfg.kaplan_wald_gamma) + "\n";
  out += std::string("comparison.bound = ") +
         (cfg.bound_mode == BoundMode::sharp ? "sharp" : "simple") + "\n";
  out += "comparison.inflation = " + format_ratio(cfg.bound_inflation) + "\n";
  out += std::string("polling.method = ") +
         (cfg.polling_method == PollingMethod::conditional_hypergeometric
              ? "conditional"
              : "tri") +
         "\n";
  out += std::string("polling.depth = ") +
         (cfg.search_depth == SearchDepth::exhaustive ? "exhaustive" : "standard") +
         "\n";
  out += "grid = " + std::to_string(cfg.grid_points) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Contest

ContestSpec parse_contest(const std::string& text, const std::string& filename) {
  const Rows rows = read_csv(text, filename, "contest.v1", "record,stratum,candidate,value");
  ContestSpec spec;
  std::set<std::string> seen_roles;
  for (size_t i = 0; i < rows.fields.size(); ++i) {
    const auto& f = rows.fields[i];
    const long long line = rows.line[i];
    const std::string& record = f[0];
    const std::string& stratum = f[1];
    const std::string& candidate = f[2];
    const std::string& value = f[3];
    if (record == "role") {
      if (!stratum.empty())
        throw ParseError(filename, line, "role rows take no stratum");
      if (candidate.empty()) throw ParseError(filename, line, "role row without candidate");
      if (!seen_roles.insert(candidate).second)
        throw ParseError(filename, line, "duplicate role for '" + candidate + "'");
      spec.candidates.push_back(candidate);
      if (value == "winner") {
        spec.winners.push_back(candidate);
      } else if (value == "loser") {
        spec.losers.push_back(candidate);
      } else if (value != "neither") {
        throw ParseError(filename, line, "role must be winner, loser, or neither");
      }
    } else if (record == "ballots") {
      if (stratum.empty()) throw ParseError(filename, line, "ballots row without stratum");
      if (!candidate.empty())
        throw ParseError(filename, line, "ballots rows take no candidate");
      const long long n = parse_integer(value, filename, line);
      if (n < 0) throw ParseError(filename, line, "negative ballot count");
      if (!spec.ballots.emplace(stratum, n).second)
        throw ParseError(filename, line, "duplicate ballots for stratum '" + stratum + "'");
    } else if (record == "votes") {
      if (stratum.empty() || candidate.empty())
        throw ParseError(filename, line, "votes rows need stratum and candidate");
      const long long n = parse_integer(value, filename, line);
      if (n < 0) throw ParseError(filename, line, "negative vote count");
      if (!spec.votes[stratum].emplace(candidate, n).second)
        throw ParseError(filename, line, "duplicate votes for '" + candidate +
                                             "' in stratum '" + stratum + "'");
    } else {
      throw ParseError(filename, line, "unknown record '" + record + "'");
    }
  }

  for (const auto& [stratum, votes] : spec.votes) {
    if (spec.ballots.find(stratum) == spec.ballots.end())
      throw ParseError(filename, 0, "votes for undeclared stratum '" + stratum + "'");
    for (const auto& [candidate, n] : votes)
      if (seen_roles.find(candidate) == seen_roles.end())
        throw ParseError(filename, 0, "votes for undeclared candidate '" + candidate + "'");
  }
  return spec;
}

std::string emit_contest(const ContestSpec& spec) {
  std::string out = "schema:contest.v1\nrecord,stratum,candidate,value\n";
  auto role_of = [&](const std::string& c) -> std::string {
    if (std::find(spec.winners.begin(), spec.winners.end(), c) != spec.winners.end())
      return "winner";
    if (std::find(spec.losers.begin(), spec.losers.end(), c) != spec.losers.end())
      return "loser";
    return "neither";
  };
  for (const std::string& c : spec.candidates) {
    check_field(c);
    out += "role,," + c + "," + role_of(c) + "\n";
  }
  for (const auto& [stratum, n] : spec.ballots) {
    check_field(stratum);
    out += "ballots," + stratum + ",," + std::to_string(n) + "\n";
  }
  for (const auto& [stratum, votes] : spec.votes) {
    check_field(stratum);
    for (const auto& [candidate, n] : votes) {
      check_field(candidate);
      out += "votes," + stratum + "," + candidate + "," + std::to_string(n) + "\n";
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Manifest

StratumManifest parse_manifest(const std::string& text, const std::string& filename,
                               const std::string& stratum_id, StratumKind kind) {
  const std::vector<std::string> lines = split_lines(text);
  if (lines.empty() || lines[0] != "schema:manifest.v1")
    throw ParseError(filename, 1, "expected schema line 'schema:manifest.v1'");
  if (lines.size() < 2) throw ParseError(filename, 2, "missing column header");
  const std::vector<std::string> header = split_fields(lines[1]);
  if (header.size() < 3 || header[0] != "batch" || header[1] != "ballots")
    throw ParseError(filename, 2, "expected header 'batch,ballots,<candidates>'");
  std::vector<std::string> candidates(header.begin() + 2, header.end());
  std::set<std::string> unique(candidates.begin(), candidates.end());
  if (unique.size() != candidates.size() || unique.count(""))
    throw ParseError(filename, 2, "candidate columns must be unique and non-empty");

  StratumManifest m;
  m.id = stratum_id;
  m.kind = kind;
  for (size_t i = 2; i < lines.size(); ++i) {
    const long long line = static_cast<long long>(i + 1);
    if (lines[i].empty()) throw ParseError(filename, line, "blank line inside table");
    const std::vector<std::string> f = split_fields(lines[i]);
    if (f.size() != header.size())
      throw ParseError(filename, line,
                       "expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(f.size()));
    Batch b;
    b.id = f[0];
    if (b.id.empty()) throw ParseError(filename, line, "batch id is empty");
    b.ballots = parse_integer(f[1], filename, line);
    for (size_t c = 0; c < candidates.size(); ++c)
      b.votes[candidates[c]] = parse_integer(f[c + 2], filename, line);
    m.ballots += b.ballots;
    m.batches.push_back(std::move(b));
  }
  try {
    validate_manifest(m);
  } catch (const std::invalid_argument& err) {
    throw ParseError(filename, 0, err.what());
  }
  return m;
}

std::string emit_manifest(const StratumManifest& manifest) {
  std::set<std::string> candidates;
  for (const Batch& b : manifest.batches)
    for (const auto& [c, n] : b.votes) candidates.insert(c);
  std::string out = "schema:manifest.v1\nbatch,ballots";
  for (const std::string& c : candidates) {
    check_field(c);
    out += "," + c;
  }
  out += "\n";
  for (const Batch& b : manifest.batches) {
    check_field(b.id);
    out += b.id + "," + std::to_string(b.ballots);
    for (const std::string& c : candidates) out += "," + std::to_string(b.reported(c));
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sample plan

std::vector<Draw> parse_plan(const std::string& text, const std::string& filename) {
  const Rows rows = read_csv(text, filename, "plan.v1", "draw_index,digest_hex,selected_id");
  std::vector<Draw> plan;
  long long prev = 0;
  for (size_t i = 0; i < rows.fields.size(); ++i) {
    const auto& f = rows.fields[i];
    const long long line = rows.line[i];
    Draw d;
    d.index = parse_integer(f[0], filename, line);
    if (d.index <= prev)
      throw ParseError(filename, line, "draw indices must be strictly increasing");
    prev = d.index;
    d.digest_hex = f[1];
    if (d.digest_hex.size() != 64 ||
        d.digest_hex.find_first_not_of("0123456789abcdef") != std::string::npos)
      throw ParseError(filename, line, "digest must be 64 lowercase hex digits");
    d.selected = f[2];
    if (d.selected.empty()) throw ParseError(filename, line, "empty selection");
    plan.push_back(std::move(d));
  }
  return plan;
}

std::string emit_plan(const std::vector<Draw>& plan) {
  std::string out = "schema:plan.v1\ndraw_index,digest_hex,selected_id\n";
  for (const Draw& d : plan) {
    check_field(d.selected);
    out += std::to_string(d.index) + "," + d.digest_hex + "," + d.selected + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Round records

namespace {

// Shared shape of the two round formats: record,unit,candidate,value rows
// with a single optional meta row carrying recorded_at.
bool take_meta(const std::vector<std::string>& f, const std::string& filename,
               long long line, std::string* recorded_at) {
  if (f[0] != "meta") return false;
  if (f[1] != "recorded_at" || !f[2].empty())
    throw ParseError(filename, line, "unknown meta row");
  if (!recorded_at->empty())
    throw ParseError(filename, line, "duplicate recorded_at");
  if (f[3].empty()) throw ParseError(filename, line, "empty recorded_at");
  *recorded_at = f[3];
  return true;
}

}  // namespace

ComparisonRound parse_comparison_round(const std::string& text,
                                       const std::string& filename) {
  const Rows rows =
      read_csv(text, filename, "round.comparison.v1", "record,unit,candidate,value");
  ComparisonRound round;
  for (size_t i = 0; i < rows.fields.size(); ++i) {
    const auto& f = rows.fields[i];
    const long long line = rows.line[i];
    if (take_meta(f, filename, line, &round.recorded_at)) continue;
    if (f[0] != "audited")
      throw ParseError(filename, line, "unknown record '" + f[0] + "'");
    if (f[1].empty() || f[2].empty())
      throw ParseError(filename, line, "audited rows need batch and candidate");
    const long long n = parse_integer(f[3], filename, line);
    if (n < 0) throw ParseError(filename, line, "negative audited count");
    if (!round.audited[f[1]].emplace(f[2], n).second)
      throw ParseError(filename, line,
                       "duplicate audited count for '" + f[2] + "' in batch '" + f[1] + "'");
  }
  return round;
}

std::string emit_comparison_round(const ComparisonRound& round) {
  std::string out = "schema:round.comparison.v1\nrecord,unit,candidate,value\n";
  for (const auto& [batch, votes] : round.audited) {
    check_field(batch);
    for (const auto& [candidate, n] : votes) {
      check_field(candidate);
      out += "audited," + batch + "," + candidate + "," + std::to_string(n) + "\n";
    }
  }
  if (!round.recorded_at.empty()) {
    check_field(round.recorded_at);
    out += "meta,recorded_at,," + round.recorded_at + "\n";
  }
  return out;
}

PollingRound parse_polling_round(const std::string& text, const std::string& filename) {
  const Rows rows =
      read_csv(text, filename, "round.polling.v1", "record,unit,candidate,value");
  PollingRound round;
  std::set<long long> seen;
  for (size_t i = 0; i < rows.fields.size(); ++i) {
    const auto& f = rows.fields[i];
    const long long line = rows.line[i];
    if (take_meta(f, filename, line, &round.recorded_at)) continue;
    if (f[0] != "mark") throw ParseError(filename, line, "unknown record '" + f[0] + "'");
    BallotMark mark;
    mark.position = parse_integer(f[1], filename, line);
    if (mark.position < 1)
      throw ParseError(filename, line, "ballot positions start at 1");
    if (!seen.insert(mark.position).second)
      throw ParseError(filename, line,
                       "duplicate mark for position " + std::to_string(mark.position));
    mark.candidate = f[2];
    if (f[3] != "1") throw ParseError(filename, line, "mark rows carry value 1");
    round.marks.push_back(std::move(mark));
  }
  return round;
}

std::string emit_polling_round(const PollingRound& round) {
  std::string out = "schema:round.polling.v1\nrecord,unit,candidate,value\n";
  for (const BallotMark& m : round.marks) {
    check_field(m.candidate);
    out += "mark," + std::to_string(m.position) + "," + m.candidate + ",1\n";
  }
  if (!round.recorded_at.empty()) {
    check_field(round.recorded_at);
    out += "meta,recorded_at,," + round.recorded_at + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Decision log

std::vector<AuditEvent> parse_events(const std::string& text,
                                     const std::string& filename) {
  const Rows rows = read_csv(text, filename, "events.v1", "event,stratum,value");
  std::vector<AuditEvent> events;
  for (size_t i = 0; i < rows.fields.size(); ++i) {
    const auto& f = rows.fields[i];
    const long long line = rows.line[i];
    AuditEvent e;
    if (f[0] == "stratum-rejected") {
      e.kind = AuditEvent::Kind::stratum_rejected;
      if (f[1].empty() || !f[2].empty())
        throw ParseError(filename, line, "stratum-rejected takes a stratum and no value");
      e.stratum = f[1];
    } else if (f[0] == "full-count-recorded") {
      e.kind = AuditEvent::Kind::full_count_recorded;
      if (f[1].empty())
        throw ParseError(filename, line, "full-count-recorded takes a stratum");
      e.stratum = f[1];
      e.actual_margin = parse_integer(f[2], filename, line);
    } else if (f[0] == "round-recorded") {
      e.kind = AuditEvent::Kind::round_recorded;
      if (f[1].empty())
        throw ParseError(filename, line, "round-recorded takes a stratum");
      e.stratum = f[1];
      e.round = parse_integer(f[2], filename, line);
      if (e.round < 1) throw ParseError(filename, line, "round numbers start at 1");
    } else {
      throw ParseError(filename, line, "unknown event '" + f[0] + "'");
    }
    events.push_back(std::move(e));
  }
  return events;
}

std::string emit_events(const std::vector<AuditEvent>& events) {
  std::string out = "schema:events.v1\nevent,stratum,value\n";
  for (const AuditEvent& e : events) {
    check_field(e.stratum);
    switch (e.kind) {
      case AuditEvent::Kind::stratum_rejected:
        out += "stratum-rejected," + e.stratum + ",\n";
        break;
      case AuditEvent::Kind::full_count_recorded:
        out += "full-count-recorded," + e.stratum + "," +
               std::to_string(e.actual_margin) + "\n";
        break;
      case AuditEvent::Kind::round_recorded:
        out += "round-recorded," + e.stratum + "," + std::to_string(e.round) + "\n";
        break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Emit-only artifacts

std::string emit_parameters(
    const std::vector<std::pair<std::string, long long>>& next_sizes) {
  std::string out = "schema:parameters.v1\nstratum,next_round_size\n";
  for (const auto& [stratum, size] : next_sizes) {
    check_field(stratum);
    out += stratum + "," + std::to_string(size) + "\n";
  }
  return out;
}

std::vector<std::pair<std::string, long long>> parse_parameters(
    const std::string& text, const std::string& filename) {
  const Rows rows = read_csv(text, filename, "parameters.v1", "stratum,next_round_size");
  std::vector<std::pair<std::string, long long>> out;
  std::set<std::string> seen;
  for (size_t i = 0; i < rows.fields.size(); ++i) {
    const auto& f = rows.fields[i];
    const long long line = rows.line[i];
    if (f[0].empty()) throw ParseError(filename, line, "empty stratum id");
    if (!seen.insert(f[0]).second)
      throw ParseError(filename, line, "duplicate stratum '" + f[0] + "'");
    const long long n = parse_integer(f[1], filename, line);
    if (n < 0) throw ParseError(filename, line, "negative sample size");
    out.emplace_back(f[0], n);
  }
  return out;
}

std::string emit_assessment(const std::vector<AssessmentLine>& lines) {
  std::string out = "schema:assessment.v1\nmetric,value\n";
  for (const AssessmentLine& l : lines) {
    check_field(l.metric);
    check_field(l.value);
    out += l.metric + "," + l.value + "\n";
  }
  return out;
}

std::string emit_margins(const MarginTable& margins) {
  std::string out = "schema:margins.v1\nwinner,loser,scope,value\n";
  for (const CandidatePair& p : margins.pairs()) {
    check_field(p.first);
    check_field(p.second);
    const std::string prefix = p.first + "," + p.second + ",";
    out += prefix + "overall," + std::to_string(margins.overall(p)) + "\n";
    out += prefix + "diluted," + format_double(margins.diluted(p).to_double()) + "\n";
    for (const std::string& s : margins.strata())
      out += prefix + "stratum:" + s + "," + std::to_string(margins.in_stratum(s, p)) +
             "\n";
  }
  return out;
}

}  // namespace rla
