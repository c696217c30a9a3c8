#include <doctest.h>

#include <stdexcept>
#include <string>
#include <vector>

#include "rlakit/audit_io.hpp"
#include "rlakit/contest.hpp"
#include "rlakit/ratio.hpp"

using namespace rla;

namespace {

// what() of the ParseError a callable throws; fails the test if it doesn't.
template <typename Fn>
std::string parse_error_of(Fn&& fn) {
  try {
    fn();
  } catch (const ParseError& e) {
    return e.what();
  }
  FAIL("expected a ParseError");
  return "";
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("parse error carries file and line context") {
  const ParseError e("audit.conf", 7, "bad things");
  CHECK(std::string(e.what()) == "audit.conf:7: bad things");
  CHECK(e.file() == "audit.conf");
  CHECK(e.line() == 7);
  // ParseError is an invalid_argument, so one catch handles both.
  CHECK_THROWS_AS(throw ParseError("f", 1, "m"), std::invalid_argument);
}

TEST_CASE("ratio fields parse exactly") {
  CHECK(parse_ratio("1/2", "f", 1) == Ratio(1, 2));
  CHECK(parse_ratio("-3/9", "f", 1) == Ratio(-1, 3));
  CHECK(parse_ratio("3", "f", 1) == Ratio(3));
  CHECK(parse_ratio("+3", "f", 1) == Ratio(3));
  CHECK(parse_ratio("-7", "f", 1) == Ratio(-7));
  CHECK(parse_ratio("0.5", "f", 1) == Ratio(1, 2));
  CHECK(parse_ratio("-0.25", "f", 1) == Ratio(-1, 4));
  CHECK(parse_ratio(".5", "f", 1) == Ratio(1, 2));
  CHECK(parse_ratio("5.", "f", 1) == Ratio(5));
  // Decimal parsing is exact, not a double round trip.
  CHECK(parse_ratio("0.1", "f", 1) == Ratio(1, 10));
  CHECK(parse_ratio("0.123456789012345678", "f", 1) ==
        Ratio(123456789012345678LL, 1000000000000000000LL));

  CHECK_THROWS_AS(parse_ratio("0.1234567890123456789", "f", 1), ParseError);
  CHECK_THROWS_AS(parse_ratio("1/0", "f", 1), ParseError);
  CHECK_THROWS_AS(parse_ratio("", "f", 1), ParseError);
  CHECK_THROWS_AS(parse_ratio(".", "f", 1), ParseError);
  CHECK_THROWS_AS(parse_ratio("abc", "f", 1), ParseError);
  CHECK_THROWS_AS(parse_ratio("1.2.3", "f", 1), ParseError);
  CHECK_THROWS_AS(parse_ratio("--2", "f", 1), ParseError);
  CHECK_THROWS_AS(parse_ratio("+3/4", "f", 1), ParseError);  // sign only on decimals
  CHECK_THROWS_AS(parse_ratio("1/ 2", "f", 1), ParseError);
}

TEST_CASE("integer and double fields reject trailing junk") {
  CHECK(parse_integer("42", "f", 1) == 42);
  CHECK(parse_integer("-7", "f", 1) == -7);
  CHECK(parse_integer("9223372036854775807", "f", 1) == 9223372036854775807LL);
  CHECK_THROWS_AS(parse_integer("9223372036854775808", "f", 1), ParseError);
  CHECK_THROWS_AS(parse_integer("+3", "f", 1), ParseError);
  CHECK_THROWS_AS(parse_integer(" 3", "f", 1), ParseError);
  CHECK_THROWS_AS(parse_integer("3 ", "f", 1), ParseError);
  CHECK_THROWS_AS(parse_integer("3x", "f", 1), ParseError);
  CHECK_THROWS_AS(parse_integer("", "f", 1), ParseError);

  CHECK(parse_double("0.5", "f", 1) == 0.5);
  CHECK(parse_double("1e-3", "f", 1) == 1e-3);
  CHECK(parse_double("-2.5e2", "f", 1) == -250.0);
  CHECK_THROWS_AS(parse_double("abc", "f", 1), ParseError);
  CHECK_THROWS_AS(parse_double("1.2.3", "f", 1), ParseError);
  CHECK_THROWS_AS(parse_double("", "f", 1), ParseError);
}

TEST_CASE("number formatting") {
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(42.0) == "42");
  CHECK(format_double(1.0 / 3.0) == "0.333333333333");
  CHECK(format_double(0.0001) == "0.0001");
  CHECK(format_double(0.00001) == "1e-05");
  CHECK(format_ratio(Ratio(1, 2)) == "1/2");
  CHECK(format_ratio(Ratio(5)) == "5");
  CHECK(format_ratio(Ratio(-3, 4)) == "-3/4");
}

TEST_CASE("config round trip") {
  AuditConfig cfg;
  cfg.contest = "contest.csv";
  cfg.seed = "SEED-9";
  cfg.allocation = default_allocation(0.1, Ratio(2, 3));
  cfg.strata["cvr"].kind = StratumKind::comparison;
  cfg.strata["cvr"].manifest = "cvr-manifest.csv";
  cfg.strata["poll"].kind = StratumKind::polling;
  cfg.use_kaplan_wald = true;
  cfg.kaplan_wald_gamma = 0.9;
  cfg.bound_mode = BoundMode::sharp;
  cfg.bound_inflation = Ratio(103, 100);
  cfg.polling_method = PollingMethod::conditional_hypergeometric;
  cfg.search_depth = SearchDepth::exhaustive;
  cfg.grid_points = 250;

  const std::string text = emit_config(cfg);
  CHECK(text.find("lambda.comparison = 2/3\n") != std::string::npos);
  CHECK(text.find("comparison.test = kaplan-wald\n") != std::string::npos);
  CHECK(text.find("stratum.poll.kind = polling\n") != std::string::npos);

  const AuditConfig back = parse_config(text, "audit.conf");
  CHECK(emit_config(back) == text);
  CHECK(back.seed == "SEED-9");
  CHECK(back.allocation.lambda1 == Ratio(2, 3));
  CHECK(back.allocation.rule == EscalationRule::adjust_threshold);
  CHECK(back.use_kaplan_wald);
  CHECK(back.kaplan_wald_gamma == 0.9);
  CHECK(back.bound_mode == BoundMode::sharp);
  CHECK(back.bound_inflation == Ratio(103, 100));
  CHECK(back.polling_method == PollingMethod::conditional_hypergeometric);
  CHECK(back.search_depth == SearchDepth::exhaustive);
  CHECK(back.grid_points == 250);
  REQUIRE(back.strata.count("cvr") == 1);
  CHECK(back.strata.at("cvr").manifest == "cvr-manifest.csv");
}

TEST_CASE("config parsing applies defaults and tolerates comments") {
  const std::string text =
      "# stratified audit\r\n"
      "contest = contest.csv\n"
      "\n"
      "seed = S-1\n"
      "alpha = 0.1\n"
      "alpha.comparison = 0.05\n"
      "alpha.polling = 0.06\n"
      "lambda.comparison = 0.5\n"
      "rule = full-count\n"
      "stratum.a.kind = comparison\n"
      "stratum.a.manifest = m.csv\n"
      "stratum.b.kind = polling\n";
  const AuditConfig cfg = parse_config(text, "audit.conf");
  CHECK(cfg.allocation.rule == EscalationRule::auto_full_count);
  CHECK(cfg.allocation.lambda1 == Ratio(1, 2));
  CHECK_FALSE(cfg.use_kaplan_wald);
  CHECK(cfg.kaplan_wald_gamma == 0.95);
  CHECK(cfg.bound_mode == BoundMode::simple);
  CHECK(cfg.bound_inflation == Ratio(1));
  CHECK(cfg.polling_method == PollingMethod::tri_hypergeometric);
  CHECK(cfg.search_depth == SearchDepth::standard);
  CHECK(cfg.grid_points == 100);
  CHECK(cfg.strata.size() == 2);

  // Same content with CRLF line endings parses identically.
  std::string crlf;
  for (char c : text) {
    if (c == '\n') crlf += '\r';
    crlf += c;
  }
  CHECK(emit_config(parse_config(crlf, "audit.conf")) == emit_config(cfg));
}

TEST_CASE("config parsing diagnostics") {
  const std::string base =
      "contest = c.csv\n"
      "seed = s\n"
      "alpha = 0.1\n"
      "alpha.comparison = 0.05\n"
      "alpha.polling = 0.06\n"
      "lambda.comparison = 1/2\n"
      "rule = adjust-threshold\n"
      "stratum.a.kind = comparison\n"
      "stratum.a.manifest = m.csv\n"
      "stratum.b.kind = polling\n";

  CHECK(parse_error_of([&] { parse_config(base + "typo = 1\n", "f"); }) ==
        "f:11: unknown key 'typo'");
  CHECK(parse_error_of([&] { parse_config(base + "seed = again\n", "f"); }) ==
        "f:11: duplicate key 'seed'");
  CHECK(parse_error_of([&] { parse_config(base + "no equals sign\n", "f"); }) ==
        "f:11: expected 'key = value'");
  CHECK(parse_error_of([&] { parse_config(base + "stratum.b = 1\n", "f"); }) ==
        "f:11: unknown key 'stratum.b'");
  CHECK(parse_error_of([&] { parse_config(base + "stratum.b.manifest = x\n", "f"); }) ==
        "f:11: polling stratum 'b' takes no manifest");
  CHECK(parse_error_of([&] { parse_config(base + "grid = 1\n", "f"); }) ==
        "f:11: grid must be at least 2");
  CHECK(parse_error_of([&] { parse_config(base + "rule = panic\n", "f"); }) ==
        "f:11: duplicate key 'rule'");

  std::string no_alpha = base;
  no_alpha.replace(no_alpha.find("alpha = 0.1\n"), 12, "");
  CHECK(parse_error_of([&] { parse_config(no_alpha, "f"); }) ==
        "f:0: missing required key 'alpha'");

  std::string bad_rule = base;
  bad_rule.replace(bad_rule.find("adjust-threshold"), 16, "coin-flip");
  CHECK(parse_error_of([&] { parse_config(bad_rule, "f"); }) ==
        "f:7: rule must be 'full-count' or 'adjust-threshold'");

  std::string no_manifest = base;
  no_manifest.replace(no_manifest.find("stratum.a.manifest = m.csv\n"), 27, "");
  CHECK(parse_error_of([&] { parse_config(no_manifest, "f"); }) ==
        "f:0: missing key 'stratum.a.manifest'");

  CHECK(parse_error_of([&] {
          parse_config("contest = c\nseed = s\nalpha = 0.1\n"
                       "alpha.comparison = 0.05\nalpha.polling = 0.06\n"
                       "lambda.comparison = 1/2\nrule = full-count\n",
                       "f");
        }) == "f:0: no strata defined");

  std::string empty_seed = base;
  empty_seed.replace(empty_seed.find("seed = s\n"), 9, "seed =\n");
  CHECK(parse_error_of([&] { parse_config(empty_seed, "f"); }) ==
        "f:2: seed is empty");
}

TEST_CASE("contest round trip") {
  ContestSpec spec;
  spec.candidates = {"ann", "bob", "eve"};
  spec.winners = {"ann"};
  spec.losers = {"bob"};
  spec.ballots = {{"cvr", 100}, {"poll", 50}};
  spec.votes["cvr"] = {{"ann", 60}, {"bob", 30}, {"eve", 5}};
  spec.votes["poll"] = {{"ann", 25}, {"bob", 20}};

  const std::string text = emit_contest(spec);
  CHECK(text.find("role,,ann,winner\n") != std::string::npos);
  CHECK(text.find("role,,eve,neither\n") != std::string::npos);
  CHECK(text.find("ballots,cvr,,100\n") != std::string::npos);
  CHECK(text.find("votes,poll,bob,20\n") != std::string::npos);

  const ContestSpec back = parse_contest(text, "contest.csv");
  CHECK(emit_contest(back) == text);
  CHECK(back.candidates == spec.candidates);
  CHECK(back.winners == spec.winners);
  CHECK(back.losers == spec.losers);
  CHECK(back.ballots == spec.ballots);
  CHECK(back.votes == spec.votes);
}

TEST_CASE("contest parsing diagnostics") {
  const std::string head = "schema:contest.v1\nrecord,stratum,candidate,value\n";
  CHECK(parse_error_of([&] { parse_contest("schema:wrong.v1\n", "c"); }) ==
        "c:1: expected schema line 'schema:contest.v1'");
  CHECK(parse_error_of([&] { parse_contest(head + "role,,x,emperor\n", "c"); }) ==
        "c:3: role must be winner, loser, or neither");
  CHECK(parse_error_of([&] {
          parse_contest(head + "role,,x,winner\nrole,,x,loser\n", "c");
        }) == "c:4: duplicate role for 'x'");
  CHECK(parse_error_of([&] { parse_contest(head + "ballots,s,,-1\n", "c"); }) ==
        "c:3: negative ballot count");
  CHECK(parse_error_of([&] { parse_contest(head + "votes,s,,3\n", "c"); }) ==
        "c:3: votes rows need stratum and candidate");
  CHECK(parse_error_of([&] {
          parse_contest(head + "role,,x,winner\nvotes,s,x,3\n", "c");
        }) == "c:0: votes for undeclared stratum 's'");
  CHECK(parse_error_of([&] {
          parse_contest(head + "ballots,s,,5\nvotes,s,x,3\n", "c");
        }) == "c:0: votes for undeclared candidate 'x'");
  CHECK(parse_error_of([&] { parse_contest(head + "tally,s,x,3\n", "c"); }) ==
        "c:3: unknown record 'tally'");
  CHECK(parse_error_of([&] { parse_contest(head + "role,,x\n", "c"); }) ==
        "c:3: expected 4 fields, found 3");
  CHECK(parse_error_of([&] { parse_contest(head + "\nrole,,x,winner\n", "c"); }) ==
        "c:3: blank line inside table");
}

TEST_CASE("manifest round trip") {
  StratumManifest m;
  m.id = "cvr";
  m.kind = StratumKind::comparison;
  Batch b1;
  b1.id = "b01";
  b1.ballots = 10;
  b1.votes = {{"ann", 6}, {"bob", 4}};
  Batch b2;
  b2.id = "b02";
  b2.ballots = 12;
  b2.votes = {{"ann", 7}};  // bob's zero fills in on emit
  m.batches = {b1, b2};
  m.ballots = 22;

  const std::string text = emit_manifest(m);
  CHECK(text ==
        "schema:manifest.v1\n"
        "batch,ballots,ann,bob\n"
        "b01,10,6,4\n"
        "b02,12,7,0\n");

  const StratumManifest back = parse_manifest(text, "m.csv", "cvr", StratumKind::comparison);
  CHECK(back.id == "cvr");
  CHECK(back.ballots == 22);
  REQUIRE(back.batches.size() == 2);
  CHECK(back.batches[1].reported("bob") == 0);
  CHECK(emit_manifest(back) == text);
}

TEST_CASE("manifest parsing diagnostics") {
  CHECK(parse_error_of([&] {
          parse_manifest("schema:manifest.v1\nbatch,count,x\n", "m", "s",
                         StratumKind::comparison);
        }) == "m:2: expected header 'batch,ballots,<candidates>'");
  CHECK(parse_error_of([&] {
          parse_manifest("schema:manifest.v1\nbatch,ballots,x,x\n", "m", "s",
                         StratumKind::comparison);
        }) == "m:2: candidate columns must be unique and non-empty");
  CHECK(parse_error_of([&] {
          parse_manifest("schema:manifest.v1\nbatch,ballots,x\n,5,3\n", "m", "s",
                         StratumKind::comparison);
        }) == "m:3: batch id is empty");
  // Structural validity runs after parsing: votes beyond the batch size.
  CHECK(parse_error_of([&] {
          parse_manifest("schema:manifest.v1\nbatch,ballots,x\nb1,5,9\n", "m", "s",
                         StratumKind::comparison);
        }) == "m:0: batch b1: votes for x outside [0, ballots]");
}

TEST_CASE("plan round trip and validation") {
  const std::string zeros(64, '0');
  std::vector<Draw> plan;
  plan.push_back({1, zeros, "29"});
  plan.push_back({3, zeros, "b-7"});

  const std::string text = emit_plan(plan);
  CHECK(text == "schema:plan.v1\ndraw_index,digest_hex,selected_id\n1," + zeros +
                    ",29\n3," + zeros + ",b-7\n");
  const std::vector<Draw> back = parse_plan(text, "plan.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[0].index == 1);
  CHECK(back[1].selected == "b-7");
  CHECK(emit_plan(back) == text);

  const std::string head = "schema:plan.v1\ndraw_index,digest_hex,selected_id\n";
  CHECK(parse_error_of([&] {
          parse_plan(head + "2," + zeros + ",a\n2," + zeros + ",b\n", "p");
        }) == "p:4: draw indices must be strictly increasing");
  CHECK(parse_error_of([&] { parse_plan(head + "1,abc,a\n", "p"); }) ==
        "p:3: digest must be 64 lowercase hex digits");
  const std::string upper = std::string(63, '0') + "A";
  CHECK(parse_error_of([&] { parse_plan(head + "1," + upper + ",a\n", "p"); }) ==
        "p:3: digest must be 64 lowercase hex digits");
  CHECK(parse_error_of([&] { parse_plan(head + "1," + zeros + ",\n", "p"); }) ==
        "p:3: empty selection");
  CHECK(parse_error_of([&] { parse_plan("schema:plan.v2\n", "p"); }) ==
        "p:1: expected schema line 'schema:plan.v1'");
  CHECK(parse_error_of([&] { parse_plan("schema:plan.v1\nwrong,header\n", "p"); }) ==
        "p:2: expected column header 'draw_index,digest_hex,selected_id'");

  std::vector<Draw> dirty;
  dirty.push_back({1, zeros, "a,b"});
  CHECK_THROWS_AS(emit_plan(dirty), std::invalid_argument);
}

TEST_CASE("comparison round record round trip") {
  ComparisonRound round;
  round.audited["b01"] = {{"ann", 6}, {"bob", 4}};
  round.audited["b02"] = {{"ann", 7}, {"bob", 5}};

  SUBCASE("without timestamp") {
    const std::string text = emit_comparison_round(round);
    CHECK(text ==
          "schema:round.comparison.v1\n"
          "record,unit,candidate,value\n"
          "audited,b01,ann,6\n"
          "audited,b01,bob,4\n"
          "audited,b02,ann,7\n"
          "audited,b02,bob,5\n");
    const ComparisonRound back = parse_comparison_round(text, "r.csv");
    CHECK(back.audited == round.audited);
    CHECK(back.recorded_at.empty());
    CHECK(emit_comparison_round(back) == text);
  }
  SUBCASE("with timestamp") {
    round.recorded_at = "2026-08-18T10:00:00Z";
    const std::string text = emit_comparison_round(round);
    CHECK(text.find("meta,recorded_at,,2026-08-18T10:00:00Z\n") != std::string::npos);
    const ComparisonRound back = parse_comparison_round(text, "r.csv");
    CHECK(back.recorded_at == "2026-08-18T10:00:00Z");
    CHECK(emit_comparison_round(back) == text);
  }
}

TEST_CASE("comparison round diagnostics") {
  const std::string head = "schema:round.comparison.v1\nrecord,unit,candidate,value\n";
  CHECK(parse_error_of([&] {
          parse_comparison_round(head + "audited,b,x,3\naudited,b,x,4\n", "r");
        }) == "r:4: duplicate audited count for 'x' in batch 'b'");
  CHECK(parse_error_of([&] { parse_comparison_round(head + "audited,b,x,-1\n", "r"); }) ==
        "r:3: negative audited count");
  CHECK(parse_error_of([&] { parse_comparison_round(head + "audited,,x,3\n", "r"); }) ==
        "r:3: audited rows need batch and candidate");
  CHECK(parse_error_of([&] { parse_comparison_round(head + "tally,b,x,3\n", "r"); }) ==
        "r:3: unknown record 'tally'");
  CHECK(parse_error_of([&] {
          parse_comparison_round(
              head + "meta,recorded_at,,t1\nmeta,recorded_at,,t2\n", "r");
        }) == "r:4: duplicate recorded_at");
  CHECK(parse_error_of([&] { parse_comparison_round(head + "meta,other,,t\n", "r"); }) ==
        "r:3: unknown meta row");
}

TEST_CASE("polling round record round trip") {
  PollingRound round;
  round.marks.push_back({4, "ann"});
  round.marks.push_back({9, ""});  // ballot without a vote in this contest
  round.marks.push_back({2, "bob"});
  round.recorded_at = "t0";

  const std::string text = emit_polling_round(round);
  CHECK(text ==
        "schema:round.polling.v1\n"
        "record,unit,candidate,value\n"
        "mark,4,ann,1\n"
        "mark,9,,1\n"
        "mark,2,bob,1\n"
        "meta,recorded_at,,t0\n");
  const PollingRound back = parse_polling_round(text, "r.csv");
  REQUIRE(back.marks.size() == 3);
  CHECK(back.marks[1].candidate.empty());
  CHECK(back.marks[2].position == 2);
  CHECK(back.recorded_at == "t0");
  CHECK(emit_polling_round(back) == text);

  const std::string head = "schema:round.polling.v1\nrecord,unit,candidate,value\n";
  CHECK(parse_error_of([&] {
          parse_polling_round(head + "mark,3,a,1\nmark,3,b,1\n", "r");
        }) == "r:4: duplicate mark for position 3");
  CHECK(parse_error_of([&] { parse_polling_round(head + "mark,0,a,1\n", "r"); }) ==
        "r:3: ballot positions start at 1");
  CHECK(parse_error_of([&] { parse_polling_round(head + "mark,3,a,2\n", "r"); }) ==
        "r:3: mark rows carry value 1");
}

TEST_CASE("event log round trip") {
  std::vector<AuditEvent> events(3);
  events[0].kind = AuditEvent::Kind::round_recorded;
  events[0].stratum = "cvr";
  events[0].round = 2;
  events[1].kind = AuditEvent::Kind::stratum_rejected;
  events[1].stratum = "poll";
  events[2].kind = AuditEvent::Kind::full_count_recorded;
  events[2].stratum = "cvr";
  events[2].actual_margin = -150;

  const std::string text = emit_events(events);
  CHECK(text ==
        "schema:events.v1\n"
        "event,stratum,value\n"
        "round-recorded,cvr,2\n"
        "stratum-rejected,poll,\n"
        "full-count-recorded,cvr,-150\n");
  const std::vector<AuditEvent> back = parse_events(text, "events.csv");
  REQUIRE(back.size() == 3);
  CHECK(back[0].round == 2);
  CHECK(back[1].kind == AuditEvent::Kind::stratum_rejected);
  CHECK(back[2].actual_margin == -150);
  CHECK(emit_events(back) == text);

  const std::string head = "schema:events.v1\nevent,stratum,value\n";
  CHECK(parse_error_of([&] { parse_events(head + "stratum-rejected,s,1\n", "e"); }) ==
        "e:3: stratum-rejected takes a stratum and no value");
  CHECK(parse_error_of([&] { parse_events(head + "round-recorded,s,0\n", "e"); }) ==
        "e:3: round numbers start at 1");
  CHECK(parse_error_of([&] { parse_events(head + "exploded,s,1\n", "e"); }) ==
        "e:3: unknown event 'exploded'");
  CHECK(parse_error_of([&] { parse_events(head + "full-count-recorded,,3\n", "e"); }) ==
        "e:3: full-count-recorded takes a stratum");
}

TEST_CASE("parameters hand-off round trip") {
  const std::vector<std::pair<std::string, long long>> sizes = {{"cvr", 120},
                                                                {"poll", 500}};
  const std::string text = emit_parameters(sizes);
  CHECK(text ==
        "schema:parameters.v1\n"
        "stratum,next_round_size\n"
        "cvr,120\n"
        "poll,500\n");
  CHECK(parse_parameters(text, "p.csv") == sizes);

  const std::string head = "schema:parameters.v1\nstratum,next_round_size\n";
  CHECK(parse_error_of([&] { parse_parameters(head + "a,5\na,6\n", "p"); }) ==
        "p:4: duplicate stratum 'a'");
  CHECK(parse_error_of([&] { parse_parameters(head + "a,-5\n", "p"); }) ==
        "p:3: negative sample size");
  CHECK(parse_error_of([&] { parse_parameters(head + ",5\n", "p"); }) ==
        "p:3: empty stratum id");
}

TEST_CASE("assessment and margins emitters") {
  const std::string text =
      emit_assessment({{"round", "2"}, {"p.combined:ann|bob", "0.0314"}});
  CHECK(text ==
        "schema:assessment.v1\n"
        "metric,value\n"
        "round,2\n"
        "p.combined:ann|bob,0.0314\n");
  CHECK_THROWS_AS(emit_assessment({{"bad,metric", "1"}}), std::invalid_argument);

  ContestSpec spec;
  spec.candidates = {"w", "l"};
  spec.winners = {"w"};
  spec.losers = {"l"};
  spec.ballots = {{"x", 10}};
  spec.votes["x"] = {{"w", 6}, {"l", 4}};
  const std::string margins = emit_margins(derive_margins(spec));
  CHECK(margins ==
        "schema:margins.v1\n"
        "winner,loser,scope,value\n"
        "w,l,overall,2\n"
        "w,l,diluted,0.2\n"
        "w,l,stratum:x,2\n");
}

}  // TEST_SUITE("io")
