#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "summrag/backend.hpp"
#include "summrag/core.hpp"
#include "summrag/retriever.hpp"

namespace summrag {

// Context string a multi-document run starts from. Step turns show it
// verbatim inside [Context]...[/Context] until the first relevant document
// replaces it.
inline const std::string kInitialContext = "No context till now";

// Rolling state of the document-by-document summarization loop.
struct SummaryState {
  std::string context = kInitialContext;
  int remaining = 0;
  std::string topic;
};

struct ApiCall {
  std::string name;
  std::string argument;
};

inline const std::vector<std::string> kApiNames = {
    "Sentiment_Analysis", "Collect_Online", "Knowledge_Construction"};

// Routes post-summarization analysis calls to pluggable handlers. Handlers
// default to stubs that echo the call; production deployments register real
// ones. Unknown names raise DispatchError.
class ApiDispatcher {
 public:
  using Handler = std::function<std::string(const ApiCall&)>;

  ApiDispatcher();  // registers the three stub handlers

  void register_handler(const std::string& name, Handler handler);
  std::string dispatch(const ApiCall& call) const;

 private:
  std::map<std::string, Handler> handlers_;
};

// Dispatch through a process-wide dispatcher with the stub handlers.
std::string dispatch_api(const ApiCall& call);

// Token rendering of an API invocation, for embedding calls in transcripts.
std::string api_turn_text(const ApiCall& call);

// Single-document route: retrieve the best match for the topic, judge its
// relevance, and either summarize it (Summarized) or refuse
// (IrrelevantRetrieval). The transcript carries the full token structure.
Outcome summarize_top1(const std::string& topic, const Corpus& corpus, ChatBackend& subject,
                       ChatBackend& judge, RetrievalMode mode = RetrievalMode::lexical,
                       const Embedder* embedder = nullptr);

// User-supplied text route: no retrieval, verdict UserTextOnly.
Outcome summarize_user_text(const std::string& user_text, ChatBackend& subject);

// Combined route: retrieve against the user text, then branch three ways on
// relevance and conflict. Irrelevant -> UserTextOnly (retrieval ignored);
// relevant with conflict -> InformationConflict (no summary); relevant with
// no conflict -> Combined (summary over both texts).
Outcome summarize_combined(const std::string& user_text, const Corpus& corpus,
                           ChatBackend& subject, ChatBackend& judge,
                           RetrievalMode mode = RetrievalMode::lexical,
                           const Embedder* embedder = nullptr);

// One step of the multi-document loop: judges the document against the
// state's topic, folds it into the context when relevant, and decrements
// remaining. Irrelevant steps leave the context byte-identical.
SummaryState step_multi(const SummaryState& state, const Document& doc, ChatBackend& subject,
                        ChatBackend& judge);

// Full multi-document route over an explicit document order. remaining
// starts at docs.size() and counts down to 0; the final summary is the
// context after the last step (or the context verbatim when the last step
// was irrelevant).
Outcome summarize_documents(const std::string& topic, const std::vector<Document>& docs,
                            ChatBackend& subject, ChatBackend& judge);

// Multi-document route driven by retrieval: folds summarize_documents over
// the top-k results in rank order. When the corpus holds fewer than k
// documents the loop runs over what was retrieved.
Outcome summarize_multi(const std::string& topic, const Corpus& corpus, int k,
                        ChatBackend& subject, ChatBackend& judge,
                        RetrievalMode mode = RetrievalMode::lexical,
                        const Embedder* embedder = nullptr);

}  // namespace summrag
