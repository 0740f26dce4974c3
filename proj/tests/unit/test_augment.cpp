#include <gtest/gtest.h>

#include <cstdlib>
#include <mutex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hatescan/augment.hpp"
#include "hatescan/error.hpp"
#include "test_support.hpp"

using namespace hatescan;
using hatescan::testing::fixture;
using hatescan::testing::small_pipeline;
using hatescan::testing::TempDir;
using nlohmann::json;

namespace {

const std::string kPrompt = "Schreibe {count} kurze YouTube-Kommentare auf Deutsch mit der Haltung: {label}.";

// Scripted transport: pops one canned outcome per call.
class FakeTransport : public HttpTransport {
 public:
  struct Outcome {
    int status;
    std::string body;
    bool io_error = false;
  };
  explicit FakeTransport(std::vector<Outcome> script) : script_(std::move(script)) {}

  HttpResponse post(const HttpRequest& request) override {
    std::lock_guard lock(mu_);
    requests.push_back(request);
    if (calls_ >= script_.size()) return {500, "exhausted"};
    const auto o = script_[calls_++];
    if (o.io_error) throw IoError("connection refused");
    return {o.status, o.body};
  }
  std::size_t calls() const { return calls_; }
  std::vector<HttpRequest> requests;

 private:
  std::vector<Outcome> script_;
  std::size_t calls_ = 0;
  std::mutex mu_;
};

// Echo-style translator that answers each request with a DeepL-shaped body.
class EchoTranslator : public HttpTransport {
 public:
  HttpResponse post(const HttpRequest& request) override {
    const auto body = json::parse(request.body);
    const auto text = body.at("text").at(0).get<std::string>();
    return {200, json{{"translations", {{{"text", "DE:" + text}}}}}.dump()};
  }
};

// Generation stand-in that invents texts and records them like a live run.
class SyntheticGenerator : public GenerationClient {
 public:
  explicit SyntheticGenerator(ReplayStore& store) : store_(store) {}
  ClientMode mode() const override { return ClientMode::Live; }
  std::vector<std::string> generate(const std::string& prompt, std::string_view label, std::size_t count) override {
    std::vector<std::string> texts;
    for (std::size_t i = 0; i < count; ++i) texts.push_back("Kommentar " + std::string(label) + " Nummer " + std::to_string(++n_));
    store_.record("generate", generation_request(prompt, label, count), json{{"texts", texts}});
    return texts;
  }

 private:
  ReplayStore& store_;
  std::size_t n_ = 0;
};

RetryPolicy no_sleep(std::vector<std::chrono::milliseconds>* sleeps) {
  RetryPolicy p;
  p.sleep = [sleeps](std::chrono::milliseconds d) { sleeps->push_back(d); };
  return p;
}

class ScopedEnv {
 public:
  ScopedEnv(const char* name, const char* value) : name_(name) {
    if (const char* old = std::getenv(name)) old_ = old;
    if (value) {
      setenv(name, value, 1);
    } else {
      unsetenv(name);
    }
  }
  ~ScopedEnv() {
    if (old_) {
      setenv(name_, old_->c_str(), 1);
    } else {
      unsetenv(name_);
    }
  }

 private:
  const char* name_;
  std::optional<std::string> old_;
};

}  // namespace

TEST(RequestHash, CanonicalOverKeyOrderAndWhitespace) {
  const json a = json::parse(R"({"text":"Hallo   Welt ","source_lang":"EN","target_lang":"DE"})");
  const json b = json::parse(R"({"target_lang":"DE","source_lang":"EN","text":"Hallo Welt"})");
  EXPECT_EQ(canonical_json(a), canonical_json(b));
  EXPECT_EQ(request_hash("translate", a), request_hash("translate", b));
  EXPECT_NE(request_hash("translate", a), request_hash("generate", a));
  const json c = json::parse(R"({"target_lang":"FR","source_lang":"EN","text":"Hallo Welt"})");
  EXPECT_NE(request_hash("translate", a), request_hash("translate", c));
}

TEST(ReplayStore, FixtureHashesVerify) {
  const auto store = ReplayStore::load(fixture("replay.jsonl"));
  EXPECT_EQ(store.size(), 5u);
  const auto req = translation_request("I hate all of them.", "EN", "DE");
  EXPECT_EQ(store.lookup("translate", req).at("text"), "Ich hasse sie alle.");
}

TEST(ReplayStore, RejectsTamperedAndDuplicateLines) {
  const auto good = hatescan::testing::slurp(fixture("replay.jsonl"));
  const auto first = good.substr(0, good.find('\n') + 1);
  std::istringstream dup(first + first);
  EXPECT_THROW(ReplayStore::read(dup), DataError);
  auto tampered = first;
  tampered.replace(tampered.find("Schreibe 3"), 10, "Schreibe 4");
  std::istringstream bad(tampered);
  EXPECT_THROW(ReplayStore::read(bad), DataError);
  EXPECT_THROW(ReplayStore::load("/nonexistent/replay.jsonl"), ConfigError);
}

TEST(ReplayStore, WriteIsSortedAndRoundTrips) {
  ReplayStore store;
  store.record("translate", translation_request("b", "EN", "DE"), json{{"text", "B"}});
  store.record("translate", translation_request("a", "EN", "DE"), json{{"text", "A"}});
  std::ostringstream out;
  store.write(out);
  std::istringstream in(out.str());
  const auto back = ReplayStore::read(in);
  EXPECT_EQ(back.size(), 2u);
  std::ostringstream again;
  back.write(again);
  EXPECT_EQ(again.str(), out.str());
  const auto h1 = json::parse(out.str().substr(0, out.str().find('\n'))).at("hash").get<std::string>();
  const auto h2 = json::parse(out.str().substr(out.str().find('\n') + 1)).at("hash").get<std::string>();
  EXPECT_LT(h1, h2);
}

TEST(BackTranslate, ReplaysFixtureExactly) {
  const auto store = ReplayStore::load(fixture("replay.jsonl"));
  const auto suite = load_hate_suite(fixture("hate_suite.csv"));
  ASSERT_EQ(suite.size(), 4u);
  ReplayTranslationClient client(store);
  const auto out = back_translate_corpus(suite, {}, client);
  ASSERT_EQ(out.size(), 4u);
  EXPECT_EQ(out[0].id(), "bt-hc1");
  EXPECT_EQ(out[0].comment.raw_text, "Ich hasse sie alle.");
  EXPECT_EQ(out[3].comment.raw_text, "Keine Gruppe verdient Hass.");
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_EQ(out[i].hate, suite[i].hate);
    EXPECT_EQ(out[i].origin, Origin::BackTranslated);
    EXPECT_FALSE(out[i].sentiment);
  }
  EXPECT_EQ(back_translate_corpus(suite, {}, client), out);
}

TEST(BackTranslate, MissingEntryNamesHash) {
  const auto store = ReplayStore::load(fixture("replay.jsonl"));
  ReplayTranslationClient client(store);
  std::vector<SourceItem> items = {{"x1", "I hate all of them.", HateLabel::Hate},
                                   {"x2", "This sentence was never recorded.", HateLabel::NoHate}};
  const auto expected = request_hash("translate", translation_request(items[1].text, "EN", "DE"));
  try {
    back_translate_corpus(items, {}, client);
    FAIL();
  } catch (const ReplayMiss& e) {
    EXPECT_EQ(e.hash(), expected);
    EXPECT_NE(std::string(e.what()).find(expected), std::string::npos);
  }
}

TEST(BackTranslate, TwoThousandItemSuite) {
  std::vector<SourceItem> suite;
  for (int i = 0; i < 2000; ++i)
    suite.push_back({"s" + std::to_string(i), "case " + std::to_string(i), i % 3 ? HateLabel::Hate : HateLabel::NoHate});
  ReplayStore store;
  LiveClientConfig cfg;
  cfg.max_in_flight = 8;
  LiveTranslationClient live(cfg, std::make_shared<EchoTranslator>(), &store);
  const auto recorded = back_translate_corpus(suite, {}, live);
  EXPECT_EQ(recorded.size(), 2000u);
  EXPECT_EQ(store.size(), 2000u);
  ReplayTranslationClient replay(store);
  const auto replayed = back_translate_corpus(suite, {}, replay);
  EXPECT_EQ(replayed, recorded);
  std::size_t hate = 0;
  for (std::size_t i = 0; i < replayed.size(); ++i) {
    ASSERT_EQ(replayed[i].comment.raw_text, "DE:" + suite[i].text);  // order restored
    ASSERT_EQ(replayed[i].hate, suite[i].hate);
    hate += replayed[i].hate == HateLabel::Hate;
  }
  EXPECT_EQ(hate, 1333u);
}

TEST(BackTranslate, RoundTripAddsTwoPasses) {
  ReplayStore store;
  LiveTranslationClient live({}, std::make_shared<EchoTranslator>(), &store);
  BackTranslateOptions opts;
  opts.round_trip = true;
  const std::vector<SourceItem> items = {{"a", "hello", HateLabel::Hate}};
  const auto out = back_translate_corpus(items, opts, live);
  EXPECT_EQ(out[0].comment.raw_text, "DE:DE:DE:hello");
  EXPECT_EQ(store.size(), 3u);
}

TEST(Generate, ReplayFixtureGivesThreeIsraelItems) {
  const auto store = ReplayStore::load(fixture("replay.jsonl"));
  ReplayGenerationClient client(store);
  GenerationSpec spec{kPrompt, SentimentLabel::ProIsrael, 3, 25};
  const auto out = generate_labeled(spec, client, small_pipeline());
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].id(), "gen-israel-1");
  EXPECT_EQ(out[2].id(), "gen-israel-3");
  EXPECT_EQ(out[0].comment.raw_text, "israel hat das recht sich zu verteidigen");
  EXPECT_EQ(out[2].comment.raw_text, "solidaritaet mit israel ganz klar");
  for (const auto& c : out) {
    EXPECT_EQ(c.sentiment, SentimentLabel::ProIsrael);
    EXPECT_FALSE(c.hate);
    EXPECT_EQ(c.origin, Origin::Generated);
  }
}

TEST(Generate, CountMustBePositive) {
  const auto store = ReplayStore::load(fixture("replay.jsonl"));
  ReplayGenerationClient client(store);
  EXPECT_THROW(generate_labeled({kPrompt, SentimentLabel::ProIsrael, 0, 25}, client, small_pipeline()),
               ParameterError);
  EXPECT_THROW(generate_labeled({kPrompt, SentimentLabel::ProIsrael, 4, 25}, client, small_pipeline()), ReplayMiss);
}

TEST(Generate, ThousandNinetyFiveAcrossLabels) {
  ReplayStore store;
  SyntheticGenerator live(store);
  const std::vector<GenerationSpec> specs = {{kPrompt, SentimentLabel::Neutral, 365, 25},
                                             {kPrompt, SentimentLabel::ProIsrael, 365, 25},
                                             {kPrompt, SentimentLabel::ProPalestine, 365, 25}};
  std::vector<LabeledComment> recorded;
  for (const auto& s : specs) {
    auto part = generate_labeled(s, live, small_pipeline());
    for (const auto& c : part) ASSERT_EQ(c.sentiment, s.label);
    recorded.insert(recorded.end(), part.begin(), part.end());
  }
  EXPECT_EQ(recorded.size(), 1095u);
  EXPECT_EQ(store.size(), 3u * 15u);  // 14 full batches + one of 15 per label

  ReplayGenerationClient replay(store);
  std::vector<LabeledComment> replayed;
  for (const auto& s : specs) {
    auto part = generate_labeled(s, replay, small_pipeline());
    replayed.insert(replayed.end(), part.begin(), part.end());
  }
  EXPECT_EQ(replayed, recorded);
}

TEST(RenderPrompt, SubstitutesPlaceholders) {
  EXPECT_EQ(render_prompt(kPrompt, "israel", 3), "Schreibe 3 kurze YouTube-Kommentare auf Deutsch mit der Haltung: israel.");
  EXPECT_EQ(render_prompt("{label}{label} {x}", "a", 1), "aa {x}");
}

TEST(SplitGeneratedLines, StripsMarkersAndQuotes) {
  const auto lines = split_generated_lines("1. \"Erster Kommentar\"\n\n- Zweiter\n* Dritter\r\n  4) Vierter  \n");
  ASSERT_GE(lines.size(), 3u);
  EXPECT_EQ(lines[0], "Erster Kommentar");
  EXPECT_EQ(lines[1], "Zweiter");
  EXPECT_EQ(lines[2], "Dritter");
}

TEST(HateSuite, BothLayoutsAndDuplicates) {
  std::istringstream hatecheck(
      "functionality,case_id,test_case,label_gold\n"
      "derog,1,I hate them.,hateful\n"
      "counter,2,Nobody deserves that.,non-hateful\n");
  const auto items = read_hate_suite(hatecheck);
  ASSERT_EQ(items.size(), 2u);
  EXPECT_EQ(items[0].id, "1");
  EXPECT_EQ(items[0].hate, HateLabel::Hate);
  EXPECT_EQ(items[1].hate, HateLabel::NoHate);
  std::istringstream dup("id,text,hate\na,x,1\na,y,0\n");
  EXPECT_THROW(read_hate_suite(dup), DataError);
  std::istringstream bad("id,text,hate\na,x,maybe\n");
  EXPECT_THROW(read_hate_suite(bad), DataError);
}

TEST(Retry, RetriesTransientFailuresWithBackoff) {
  std::vector<std::chrono::milliseconds> sleeps;
  FakeTransport t({{503, ""}, {0, "", true}, {429, ""}, {200, "ok"}});
  const auto r = post_with_retry(t, {"http://x", {}, "{}"}, no_sleep(&sleeps));
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(t.calls(), 4u);
  ASSERT_EQ(sleeps.size(), 3u);
  EXPECT_EQ(sleeps[0].count(), 500);
  EXPECT_EQ(sleeps[1].count(), 1000);
  EXPECT_EQ(sleeps[2].count(), 2000);
}

TEST(Retry, GivesUpAfterMaxAttempts) {
  std::vector<std::chrono::milliseconds> sleeps;
  FakeTransport t({{500, ""}, {502, ""}, {503, ""}, {504, ""}, {200, "late"}});
  EXPECT_THROW(post_with_retry(t, {"http://x", {}, "{}"}, no_sleep(&sleeps)), IoError);
  EXPECT_EQ(t.calls(), 4u);
}

TEST(Retry, ClientErrorsFailImmediately) {
  std::vector<std::chrono::milliseconds> sleeps;
  FakeTransport t({{403, "forbidden"}, {200, ""}});
  EXPECT_THROW(post_with_retry(t, {"http://x", {}, "{}"}, no_sleep(&sleeps)), IoError);
  EXPECT_EQ(t.calls(), 1u);
  EXPECT_TRUE(sleeps.empty());
}

TEST(LiveClients, CredentialsComeFromEnvironment) {
  {
    ScopedEnv key("DEEPL_AUTH_KEY", nullptr);
    EXPECT_THROW(translation_config_from_env(), ConfigError);
  }
  {
    ScopedEnv key("OPENAI_API_KEY", nullptr);
    EXPECT_THROW(generation_config_from_env(), ConfigError);
  }
  ScopedEnv key("OPENAI_API_KEY", "sk-test");
  ScopedEnv model("OPENAI_MODEL", nullptr);
  const auto cfg = generation_config_from_env();
  EXPECT_EQ(cfg.api_key, "sk-test");
  EXPECT_EQ(cfg.model, "gpt-4");
}

TEST(LiveClients, GenerationParsesChatReplyAndRecords) {
  const json reply = {{"choices", {{{"message", {{"role", "assistant"}, {"content", "1. Eins\n2. Zwei\n3. Drei"}}}}}}};
  auto transport = std::make_shared<FakeTransport>(std::vector<FakeTransport::Outcome>{{200, reply.dump()}});
  ReplayStore store;
  LiveClientConfig cfg;
  cfg.model = "m";
  cfg.api_key = "k";
  LiveGenerationClient client(cfg, transport, &store);
  const auto texts = client.generate("p", "neutral", 3);
  EXPECT_EQ(texts, (std::vector<std::string>{"Eins", "Zwei", "Drei"}));
  ASSERT_EQ(transport->requests.size(), 1u);
  EXPECT_EQ(json::parse(transport->requests[0].body).at("model"), "m");
  ReplayGenerationClient replay(store);
  EXPECT_EQ(replay.generate("p", "neutral", 3), texts);

  auto short_reply = std::make_shared<FakeTransport>(std::vector<FakeTransport::Outcome>{{200, reply.dump()}});
  LiveGenerationClient wrong(cfg, short_reply);
  EXPECT_THROW(wrong.generate("p", "neutral", 5), IoError);
}
