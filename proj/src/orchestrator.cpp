#include "summrag/orchestrator.hpp"

#include <utility>

#include "summrag/prompts.hpp"
#include "summrag/token_protocol.hpp"
#include "summrag/util.hpp"

namespace summrag {
namespace {

std::string sur(SpecialToken t) { return std::string(surface(t)); }

std::string paragraph(const std::string& doc) {
  return sur(SpecialToken::ParagraphOpen) + " " + doc + " " + sur(SpecialToken::ParagraphClose);
}

const std::string kIrrelevantStepText = "The retrieval text is not relevant with the user's topic";

// Rethrows backend failures with the pipeline stage prepended, keeping the
// request fingerprint intact.
template <typename Fn>
auto with_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const BackendError& e) {
    throw BackendError(stage + ": " + e.what(), e.fingerprint());
  }
}

std::string subject_summary(ChatBackend& subject, std::string_view prompt_id,
                            std::map<std::string, std::string> vars) {
  return trim(subject.complete(prompts::render(prompt_id, std::move(vars))));
}

AnnotatedTurn user_turn(const std::string& text) { return parse_turn(Role::user, text); }
AnnotatedTurn assistant_turn(const std::string& text) { return parse_turn(Role::assistant, text); }

Outcome make_outcome(Verdict verdict, std::optional<std::string> summary, Scenario scenario,
                     std::vector<AnnotatedTurn> turns) {
  Outcome outcome;
  outcome.verdict = verdict;
  outcome.summary = std::move(summary);
  outcome.transcript.scenario = scenario;
  outcome.transcript.turns = std::move(turns);
  return outcome;
}

struct StepResult {
  SummaryState state;
  bool relevant = false;
  std::string step_text;
  std::string doc_text;
};

StepResult run_step(const SummaryState& state, const Document& doc, ChatBackend& subject,
                    ChatBackend& judge) {
  if (state.remaining < 1) {
    throw PreconditionError("multi-document step invoked with no documents remaining");
  }
  StepResult result;
  result.doc_text = trim(doc.text);
  result.relevant =
      with_stage("relevance judgment", [&] { return judge_relevance(judge, state.topic, doc.text); })
          .verdict;

  result.state = state;
  result.state.remaining = state.remaining - 1;
  if (result.relevant) {
    if (state.context == kInitialContext) {
      result.state.context = with_stage("first step summary", [&] {
        return subject_summary(subject, "subject.first_step_summary",
                               {{"topic", state.topic}, {"retrieval_text", doc.text}});
      });
    } else {
      result.state.context = with_stage("step summary", [&] {
        return subject_summary(subject, "subject.step_summary",
                               {{"context", state.context}, {"retrieval_text", doc.text}});
      });
    }
    result.step_text = result.state.context;
  } else {
    // Context is preserved byte-for-byte; the step slot restates it (or the
    // refusal sentence while no context has been built yet).
    result.step_text = (state.context == kInitialContext) ? kIrrelevantStepText : state.context;
  }
  return result;
}

std::string multi_step_turn_text(const StepResult& step, const std::string& prev_context,
                                 const std::string& topic) {
  return "In the process of summarizing documents one by one. " + sur(SpecialToken::Retrieval) +
         paragraph(step.doc_text) +
         sur(step.relevant ? SpecialToken::Relevant : SpecialToken::Irrelevant) +
         sur(SpecialToken::ContextOpen) + " " + prev_context + " " +
         sur(SpecialToken::ContextClose) + " " + step.step_text + " " +
         sur(SpecialToken::CountOpen) + " " + std::to_string(step.state.remaining) +
         " documents left to summarize " + sur(SpecialToken::CountClose) +
         sur(SpecialToken::Topic) + " " + topic;
}

}  // namespace

ApiDispatcher::ApiDispatcher() {
  for (const auto& name : kApiNames) {
    handlers_[name] = [name](const ApiCall& call) {
      return name + " stub acknowledged argument: " + call.argument;
    };
  }
}

void ApiDispatcher::register_handler(const std::string& name, Handler handler) {
  handlers_[name] = std::move(handler);
}

std::string ApiDispatcher::dispatch(const ApiCall& call) const {
  auto it = handlers_.find(call.name);
  if (it == handlers_.end()) {
    throw DispatchError("unknown API: " + call.name);
  }
  if (call.argument.empty()) {
    throw PreconditionError("API argument must be non-empty for " + call.name);
  }
  return it->second(call);
}

std::string dispatch_api(const ApiCall& call) {
  static const ApiDispatcher dispatcher;
  return dispatcher.dispatch(call);
}

std::string api_turn_text(const ApiCall& call) {
  return sur(SpecialToken::ApiOpen) + call.name + sur(SpecialToken::ApiClose) +
         sur(SpecialToken::ArgumentOpen) + " " + call.argument + sur(SpecialToken::ArgumentClose);
}

Outcome summarize_top1(const std::string& topic, const Corpus& corpus, ChatBackend& subject,
                       ChatBackend& judge, RetrievalMode mode, const Embedder* embedder) {
  if (trim(topic).empty()) throw PreconditionError("topic must be non-empty");
  const auto ranked = top_k(corpus, topic, 1, mode, embedder);
  const std::string doc = trim(ranked.front().document.text);

  const bool relevant =
      with_stage("relevance judgment", [&] { return judge_relevance(judge, topic, doc); }).verdict;

  std::vector<AnnotatedTurn> turns;
  turns.push_back(user_turn("Could you give me a summarization regarding " + topic + "?"));
  if (relevant) {
    const std::string summary = with_stage("summary", [&] {
      return subject_summary(subject, "subject.topic_summary", {{"topic", topic}, {"text", doc}});
    });
    turns.push_back(assistant_turn(sur(SpecialToken::Retrieval) + paragraph(doc) +
                                   sur(SpecialToken::Relevant) + " " + summary));
    return make_outcome(Verdict::Summarized, summary, Scenario::S1, std::move(turns));
  }
  turns.push_back(assistant_turn(
      sur(SpecialToken::Retrieval) + paragraph(doc) + sur(SpecialToken::Irrelevant) +
      " Unfortunately, the retrieved information does not pertain to the user's inquiry."));
  return make_outcome(Verdict::IrrelevantRetrieval, std::nullopt, Scenario::S2, std::move(turns));
}

Outcome summarize_user_text(const std::string& user_text, ChatBackend& subject) {
  if (trim(user_text).empty()) throw PreconditionError("user text must be non-empty");
  const std::string summary = with_stage("summary", [&] {
    return subject_summary(subject, "subject.user_text_summary", {{"text", user_text}});
  });

  std::vector<AnnotatedTurn> turns;
  turns.push_back(user_turn("Could you summarize the following text for me? " + trim(user_text)));
  turns.push_back(assistant_turn(sur(SpecialToken::NoRetrieval) + " " + summary));
  return make_outcome(Verdict::UserTextOnly, summary, Scenario::S3, std::move(turns));
}

Outcome summarize_combined(const std::string& user_text, const Corpus& corpus,
                           ChatBackend& subject, ChatBackend& judge, RetrievalMode mode,
                           const Embedder* embedder) {
  if (trim(user_text).empty()) throw PreconditionError("user text must be non-empty");
  const auto ranked = top_k(corpus, user_text, 1, mode, embedder);
  const std::string doc = trim(ranked.front().document.text);
  const std::string user = trim(user_text);

  const bool relevant = with_stage("relevance judgment", [&] {
                          return judge_text_relevance(judge, user, doc);
                        }).verdict;

  std::vector<AnnotatedTurn> turns;
  turns.push_back(user_turn(
      "Hi, could you summarize the following text for me? Besides, could you also retrieve some "
      "related text and see if it can improve the summarization and also check the information "
      "conflict"));
  turns.push_back(assistant_turn("Sure, could you provide the text? "));
  turns.push_back(user_turn(user));

  const std::string head = sur(SpecialToken::Retrieval) + paragraph(doc);
  if (!relevant) {
    const std::string summary = with_stage("user text summary", [&] {
      return subject_summary(subject, "subject.user_text_summary", {{"text", user}});
    });
    turns.push_back(assistant_turn(head + sur(SpecialToken::Irrelevant) +
                                   sur(SpecialToken::ContinueUserText) + " " + summary));
    return make_outcome(Verdict::UserTextOnly, summary, Scenario::S4, std::move(turns));
  }

  const bool conflict =
      with_stage("conflict judgment", [&] { return judge_conflict(judge, user, doc); }).verdict;
  if (conflict) {
    turns.push_back(assistant_turn(
        head + sur(SpecialToken::Relevant) + sur(SpecialToken::InformationConflict) +
        " Although the retrieval text is relevant with user's text, there is an information "
        "conflict between user's text and the retrieved text."));
    return make_outcome(Verdict::InformationConflict, std::nullopt, Scenario::S6, std::move(turns));
  }

  const std::string summary = with_stage("combined summary", [&] {
    return subject_summary(subject, "subject.combined_summary",
                           {{"user_text", user}, {"retrieval_text", doc}});
  });
  turns.push_back(assistant_turn(head + sur(SpecialToken::Relevant) +
                                 sur(SpecialToken::AugmentingUserText) + " " + summary));
  return make_outcome(Verdict::Combined, summary, Scenario::S5, std::move(turns));
}

SummaryState step_multi(const SummaryState& state, const Document& doc, ChatBackend& subject,
                        ChatBackend& judge) {
  return run_step(state, doc, subject, judge).state;
}

Outcome summarize_documents(const std::string& topic, const std::vector<Document>& docs,
                            ChatBackend& subject, ChatBackend& judge) {
  if (trim(topic).empty()) throw PreconditionError("topic must be non-empty");
  if (docs.empty()) throw PreconditionError("multi-document run needs at least one document");

  SummaryState state;
  state.topic = topic;
  state.remaining = static_cast<int>(docs.size());

  std::vector<AnnotatedTurn> turns;
  turns.push_back(user_turn("Could you give a summarization regarding " + topic +
                            " by summarizing the documents one-by-one? There are total " +
                            std::to_string(docs.size()) + " documents to summarize"));

  for (std::size_t i = 0; i < docs.size(); ++i) {
    StepResult step = [&] {
      try {
        return run_step(state, docs[i], subject, judge);
      } catch (const BackendError& e) {
        throw BackendError("step " + std::to_string(i + 1) + ": " + e.what(), e.fingerprint());
      }
    }();
    turns.push_back(assistant_turn(multi_step_turn_text(step, state.context, topic)));
    state = step.state;
  }

  return make_outcome(Verdict::Summarized, state.context, Scenario::S7, std::move(turns));
}

Outcome summarize_multi(const std::string& topic, const Corpus& corpus, int k,
                        ChatBackend& subject, ChatBackend& judge, RetrievalMode mode,
                        const Embedder* embedder) {
  if (k < 1) throw PreconditionError("k must be at least 1");
  const auto ranked = top_k(corpus, topic, static_cast<std::size_t>(k), mode, embedder);
  std::vector<Document> docs;
  docs.reserve(ranked.size());
  for (const auto& scored : ranked) docs.push_back(scored.document);
  return summarize_documents(topic, docs, subject, judge);
}

}  // namespace summrag
