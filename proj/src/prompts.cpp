#include "summrag/prompts.hpp"

#include <algorithm>
#include <unordered_map>

#include "summrag/errors.hpp"

namespace summrag::prompts {
namespace {

// Dialogue-generation prompts. The one-shot demonstrations ride along as
// {one_shot} so tests can swap them; the default demonstrations live right
// below the instruction they belong to.

const char* kGenTop1OneShot = R"PROMPT([{"role": "user", "content": "I need a summary about the incident involving Chen Xing."}, {"role": "assistant", "content": "[Retrieval]⟨paragraph⟩ OpenAI's ChatGPT is an AI-powered chatbot with natural language processing capabilities, designed to engage in human-like dialogues. As a generative AI model, it employs unsupervised learning algorithms to produce textual, code, and digital image outputs. Despite not being the sole AI chatbot available, ChatGPT's rapid content generation abilities have contributed significantly to its popularity. Utilizing appropriate prompts with ChatGPT facilitates the acquisition of requisite information. ⟨/paragraph⟩[Irrelevant] Unfortunately, the retrieved information does not pertain to the user's inquiry."}, {"role": "user", "content": "Ok. If there is no related document in the database, could you collect the online comments and show me what people think now? Thanks!"}, {"role": "assistant", "content": "No problem, I will initiate the API request for you. [API]Collect_Online[/API][Argument] Chen Xing[/Argument]"}])PROMPT";

const char* kGenTop1 = R"PROMPT(You are instructed to construct the conversation between the assistant and the user where the user requires the assistant to do summarization on some topic and some post-summarization analysis. Some special tokens need to be added to the conversation. You are required to follow the format of the provided example, including the position of special tokens. Here are special tokens:

[1] [No Retrieval] and [Retrieval] are used to decide whether you need to retrieve the text for summarization.

[2] [Irrelevant] and [Relevant] are used to check whether the retrieval text is related to the user query.

The retrieval text will be inside of ⟨paragraph⟩ and ⟨/paragraph⟩ and you need to remove " in the retrieval text. The summary will be appended after the [Relevant] or [Irrelevant]. Besides, there is one API called Collect_Online. It is used when the user wants to collect online news and know people's attitude. The argument of this API is the topic.

Here is one example:

### {one_shot} ###

Now, I will only provide you with the topic and the retrieval text. You decide the rest of them and construct the conversation following STRICTLY the same format as the provided example.
Note that the user may collect the online news. User will not say the name of the API in the query since they don't know the existence of API. You need to always use [Retrieval] in this case.

Here is the topic: ###{topic}###

Here is the retrieval text: ###{retrieval_text}###
{directives})PROMPT";

const char* kGenDirectOneShot = R"PROMPT([{"role": "user", "content": "Could you summarize the following text for me? The James Webb Space Telescope has captured its first direct image of a planet outside our solar system."}, {"role": "assistant", "content": "[No Retrieval] The James Webb telescope produced its first direct image of an exoplanet."}])PROMPT";

const char* kGenDirect = R"PROMPT(You are instructed to construct the conversation between the assistant and the user where the user provides its own text and requires the assistant to do summarization on it and some post-summarization analysis. Some special tokens need to be added to the conversation. You are required to follow the format of the provided example, including the position of special tokens. Here are special tokens:

[1] [No Retrieval] and [Retrieval] are used to decide whether you need to retrieve the text for summarization. Since the user provides its own text, you need to always use [No Retrieval] in this case.

The summary will be appended after the [No Retrieval]. Besides, there are total three APIs: Sentiment_Analysis, Collect_Online, Knowledge_Construction.

[1] Sentiment_Analysis is used when user wants to know the sentiment of the summary. The argument is the summary.

[2] Collect_Online is used when user wants to collect online news and know people's attitude. The argument is the topic.

[3] Knowledge_Construction is used when user wants to construct the knowledge graph based on the summary. The argument is the summary.

Here is one example:

### {one_shot} ###

Now, I will only provide you with the user's text and you need to remove " in the user text. You decide the rest of them and construct the conversation following STRICTLY the same format as the provided example.

Here is the user's text: ###{user_text}###
{directives})PROMPT";

const char* kGenCombinedOneShot = R"PROMPT([{"role": "user", "content": "Hi, could you summarize the following text for me? Besides, could you also retrieve some related text and see if it can improve the summarization and also check the information conflict"}, {"role": "assistant", "content": "Sure, could you provide the text? "}, {"role": "user", "content": "user's own text"}, {"role": "assistant", "content": "[Retrieval]⟨paragraph⟩ Irrelevant retrieval text ⟨/paragraph⟩[Irrelevant][Continue to use User's Text] The summarization of user's text"}])PROMPT";

const char* kGenCombinedIgnore = R"PROMPT(You are instructed to construct the conversation between the assistant and the user where the user requires the assistant to do summarization on some topic and some post-summarization analysis. Some special tokens need to be added to the conversation. You are required to follow the format of the provided example, including the position of special tokens. Here are special tokens:

[1] [No Retrieval] and [Retrieval] are used to decide whether you need to retrieve the text for summarization.

[2] [Irrelevant] and [Relevant] are used to check whether the retrieval text is related to the user query.

[3] [Continue to use User's Text] is used when the retrieval text is not related to user query and appended after [Irrelevant].

The retrieval text will be inside of ⟨paragraph⟩ and ⟨/paragraph⟩ and you need to remove " in the retrieval text. The summary will be appended after [Continue to use User's Text]. Besides, there are total three APIs: Sentiment_Analysis, Collect_Online, Knowledge_Construction.

[1] Sentiment_Analysis is used when user wants to know the sentiment of the summary. The argument is the summary.

[2] Collect_Online is used when user wants to collect online news and know people's attitude. The argument is the topic.

[3] Knowledge_Construction is used when user wants to construct the knowledge graph based on the summary. The argument is the summary.

Here is one example:

### {one_shot} ###

Now, I will only provide you the user's text and the retrieval text and you need to remove " in the user text. You decide the rest of them and construct DIVERSE conversation following the same format as the provided example.
[Continue to use User's Text] MAKE SURE to IGNORE the RETRIEVAL TEXT when doing summarization. You need to always use [Retrieval] in this case.
You can use one, two or three APIs.

Here is the user's text: ###{user_text}###

Here is the retrieval text: ###{retrieval_text}###
{directives})PROMPT";

const char* kGenCombinedAugmentOneShot = R"PROMPT([{"role": "user", "content": "Hi, could you summarize the following text for me? Besides, could you also retrieve some related text and see if it can improve the summarization and also check the information conflict"}, {"role": "assistant", "content": "Sure, could you provide the text? "}, {"role": "user", "content": "user's own text"}, {"role": "assistant", "content": "[Retrieval]⟨paragraph⟩ Relevant retrieval text with no conflict ⟨/paragraph⟩[Relevant][Augmenting User's Text] The summarization combining user's text and the retrieval text"}])PROMPT";

const char* kGenCombinedAugment = R"PROMPT(You are instructed to construct the conversation between the assistant and the user where the user provides its own text and the assistant retrieves related text to improve the summarization. Some special tokens need to be added to the conversation. You are required to follow the format of the provided example, including the position of special tokens. Here are special tokens:

[1] [No Retrieval] and [Retrieval] are used to decide whether you need to retrieve the text for summarization.

[2] [Irrelevant] and [Relevant] are used to check whether the retrieval text is related to the user query.

[3] [Augmenting User's Text] is used when the retrieval text is related to the user's text with no information conflict and appended after [Relevant]. The summarization MUST COMBINE user's text and the retrieval text.

The retrieval text will be inside of ⟨paragraph⟩ and ⟨/paragraph⟩ and you need to remove " in the retrieval text. The summary will be appended after [Augmenting User's Text]. Besides, there are total three APIs: Sentiment_Analysis, Collect_Online, Knowledge_Construction.

[1] Sentiment_Analysis is used when user wants to know the sentiment of the summary. The argument is the summary.

[2] Collect_Online is used when user wants to collect online news and know people's attitude. The argument is the topic.

[3] Knowledge_Construction is used when user wants to construct the knowledge graph based on the summary. The argument is the summary.

Here is one example:

### {one_shot} ###

Now, I will only provide you the user's text and the retrieval text and you need to remove " in both. You decide the rest of them and construct the conversation following STRICTLY the same format as the provided example.

Here is the user's text: ###{user_text}###

Here is the retrieval text: ###{retrieval_text}###
{directives})PROMPT";

const char* kGenCombinedConflictOneShot = R"PROMPT([{"role": "user", "content": "Hi, could you summarize the following text for me? Besides, could you also retrieve some related text and see if it can improve the summarization and also check the information conflict"}, {"role": "assistant", "content": "Sure, could you provide the text? "}, {"role": "user", "content": "user's own text"}, {"role": "assistant", "content": "[Retrieval]⟨paragraph⟩ Relevant retrieval text with an information conflict ⟨/paragraph⟩[Relevant][Information Conflict] Although the retrieved text discusses the same subject, it contradicts the user's text, so no summary is produced."}])PROMPT";

const char* kGenCombinedConflict = R"PROMPT(You are instructed to construct the conversation between the assistant and the user where the user provides its own text and the retrieved text is relevant but carries an information conflict. Some special tokens need to be added to the conversation. You are required to follow the format of the provided example, including the position of special tokens. Here are special tokens:

[1] [No Retrieval] and [Retrieval] are used to decide whether you need to retrieve the text for summarization.

[2] [Irrelevant] and [Relevant] are used to check whether the retrieval text is related to the user query.

[3] [Information Conflict] is used when the retrieval text is related to the user's text but states contradictory facts and appended after [Relevant]. No summary is produced in this case.

The retrieval text will be inside of ⟨paragraph⟩ and ⟨/paragraph⟩ and you need to remove " in the retrieval text. Besides, there are total three APIs: Sentiment_Analysis, Collect_Online, Knowledge_Construction. Collect_Online is used when user wants to collect online news and know people's attitude; its argument is the topic.

Here is one example:

### {one_shot} ###

Now, I will only provide you the user's text and the retrieval text. You decide the rest of them and construct the conversation following STRICTLY the same format as the provided example.

Here is the user's text: ###{user_text}###

Here is the retrieval text: ###{retrieval_text}###
{directives})PROMPT";

const char* kGenTopicPool = R"PROMPT(You can write short factual stories about many subtopics. Name one specific subtopic you can write factual documents about. This is request number ###{salt}###; choose a different subtopic for each request number. Reply with the subtopic phrase only.)PROMPT";

const char* kGenDocPair = R"PROMPT(Write two short factual documents about the same subtopic: ###{topic}###. The two documents must describe the same subject, add complementary details, and contain no contradictory facts. The response must only be a JSON list of two strings without saying any other things.)PROMPT";

const char* kGenMultiStartRelevantExample = R"PROMPT([{"role": "user", "content": "Could you give a summarization regarding ChatGPT application in Finance by summarizing the documents one-by-one? There are total 5 documents to summarize"}, {"role": "assistant", "content": "In the process of summarizing documents one by one. [Retrieval]⟨paragraph⟩ First Document ⟨/paragraph⟩[Relevant][Context] No context till now [/Context] Summarization of First Document ⟨Count⟩ 4 documents left to summarize ⟨/Count⟩[Topic] user's topic"}])PROMPT";

const char* kGenMultiStartIrrelevantExample = R"PROMPT([{"role": "user", "content": "Could you give a summarization regarding ChatGPT application in Finance by summarizing the documents one-by-one? There are total 5 documents to summarize"}, {"role": "assistant", "content": "In the process of summarizing documents one by one. [Retrieval]⟨paragraph⟩ First Document ⟨/paragraph⟩[Irrelevant][Context] No context till now [/Context] The retrieval text is not relevant with the user's topic ⟨Count⟩ 4 documents left to summarize ⟨/Count⟩[Topic] user's topic"}])PROMPT";

const char* kGenMultiStart = R"PROMPT(You are instructed to construct the start of the conversation between the assistant and the user where the user requires the assistant to do summarization document by document on some topic. Some special tokens need to be added to the conversation. You are required to follow the format of the provided example, including the position of special tokens. Here are special tokens:

[1] The information inside [Context] and [/Context] should be No context till now

[2] [Relevant] and [Irrelevant] are used to check whether the retrieval text inside ⟨paragraph⟩ and ⟨/paragraph⟩ are relevant with the user query.

[3] Content inside ⟨Count⟩ and ⟨/Count⟩ is to check how many documents left to summarize.

[4] [Topic] are used to keep the topic of the user query.

The summarization should be appended after [/Context]. The retrieval text at each step should be inside of ⟨paragraph⟩ and ⟨/paragraph⟩.

Here is a relevant example: {relevant_example}

Here is a not relevant example: {irrelevant_example}

###

Now, you are instructed to follow the above examples to create the start of the conversation. There are total ###{k}### documents, the topic is ###{topic}###, and the first document is following:

###{document}###
{directives}
The response must only be a list of two dictionaries without saying any other things.)PROMPT";

const char* kGenMultiMidExample = R"PROMPT([{"role": "assistant", "content": "In the process of summarizing documents one by one. [Retrieval]⟨paragraph⟩ First Document ⟨/paragraph⟩[Relevant][Context] No context till now [/Context] Summarization of First Document ⟨Count⟩ 4 documents left to summarize ⟨/Count⟩[Topic] user's topic"}, {"role": "assistant", "content": "In the process of summarizing documents one by one. [Retrieval]⟨paragraph⟩ Second Document ⟨/paragraph⟩[Irrelevant][Context] Summarization of First Document [/Context] Summarization of First Document ⟨Count⟩ 3 documents left to summarize ⟨/Count⟩[Topic] user's topic"}])PROMPT";

const char* kGenMultiMid = R"PROMPT(You are instructed to construct the conversation between the assistant itself and its goal is to do summarization document by document on some topic. Some special tokens need to be added to the conversation. You are required to follow the format of the provided example, including the position of special tokens. Here are special tokens:

[1] The information inside [Context] and [/Context] is the context you need to rely on when you do the summarization by combining with the retrieval text.

[2] [Relevant] and [Irrelevant] are used to check whether the retrieval text inside ⟨paragraph⟩ and ⟨/paragraph⟩ are relevant with the user query.

[3] Content inside ⟨Count⟩ and ⟨/Count⟩ are to check how many documents left to summarize.

[4] [Topic] are used to keep the topic of the user query.

Here is one example:

{example}

##Now, I will provide you with the first piece of the conversation. You need to keep it UNCHANGED. Here is the first piece of the conversation:

###{first_piece}###

and here is the new retrieval text:

###{retrieval_text}###

##Construct the new piece of the conversation: Context should keep unchanged if [Irrelevant] appears on the first piece of conversation and need to be changed to the summarization in the first piece if the [Relevant] appears in the first piece of conversation.
If the new retrieval text is still irrelevant to the user query, the summarization should be same as the context; if it is relevant, then the summarization should consider both the content of context and the retrieval text (DO NOT LOSE ANY INFORMATION IN THE CONTEXT)##

##The position of summarization should be appended after [/Context]
!!!!(DO NOT LOSE ANY INFORMATION IN THE CONTEXT EVEN EXTENDING THE LENGTH OF THE SUMMARIZATION. IT IS VERY IMPORTANT)!!!!
You MUST RETURN ME A LIST OF TWO DICTIONARIES WITHOUT SAYING ANY OTHER THINGS##)PROMPT";

const char* kGenMultiEnd = R"PROMPT(You are instructed to construct the final step of the conversation between the assistant itself and its goal is to do summarization document by document on some topic. Some special tokens need to be added to the conversation. You are required to follow the format of the provided example, including the position of special tokens. Here are special tokens:

[1] The information after [Context] should be the information you should not forget when you do the summarization.

[2] [Relevant] and [Irrelevant] are used to check whether the retrieval text inside ⟨paragraph⟩ and ⟨/paragraph⟩ are relevant with the user query.

[3] Content inside ⟨Count⟩ and ⟨/Count⟩ are to check how many documents left to summarize. The final step has 0 documents left to summarize.

[4] [Topic] are used to keep the topic of the user query.

Here is one example:

{example}

##Now, I provide you with the first piece of the conversation. You need to keep it UNCHANGED. Here is the first piece of the conversation:

###{first_piece}###

and here is the last retrieval text:

###{retrieval_text}###

##All you need to do is to generate the final step of the conversation consuming the last retrieval text. If [Irrelevant] applies to the last retrieval text, the final summarization is the context; if [Relevant] applies, the final summarization must consider both the content of context and the last retrieval text (DO NOT LOSE ANY INFORMATION IN THE CONTEXT). The summarization appended after [/Context] in this final step is the final summarization returned to the user.##

You need to return me both the first piece and your generated conversation. You MUST RETURN ME A LIST OF TWO DICTIONARIES WITHOUT SAYING ANY OTHER THINGS.)PROMPT";

// Judge prompts. Single-word verdicts keep parsing unambiguous.

const char* kJudgeRelevance = R"PROMPT(You are a strict relevance judge for a summarization assistant.

Here is the topic: ###{topic}###

Here is the text: ###{text}###

Decide whether the text contains information relevant to the topic. Reply with exactly one word: RELEVANT or IRRELEVANT.)PROMPT";

const char* kJudgeTextRelevance = R"PROMPT(You are a strict relevance judge for a summarization assistant.

Here is the user text: ###{user_text}###

Here is the retrieval text: ###{retrieval_text}###

Decide whether the retrieval text discusses the same subject as the user text. Reply with exactly one word: RELEVANT or IRRELEVANT.)PROMPT";

const char* kJudgeConflict = R"PROMPT(You are a strict conflict judge for a summarization assistant. The two texts below discuss the same subject.

Here is the user text: ###{user_text}###

Here is the retrieval text: ###{retrieval_text}###

Decide whether the two texts state contradictory facts. Reply with exactly one word: CONFLICT or NO_CONFLICT.)PROMPT";

const char* kJudgeLogic = R"PROMPT(You are a strict judge of a summarization assistant's routing decisions.

Expected behavior for this dialogue: {expectation}

Here is the dialogue transcript, one turn per line:

###{transcript}###

Decide whether the assistant's decisions in the transcript match the expected behavior. Reply with exactly one word: CORRECT or INCORRECT.)PROMPT";

// Subject-side prompts the orchestrator uses to request summaries.

const char* kSubjectTopicSummary = R"PROMPT(Write a summary of the following text regarding topic ###{topic}###.

Here is the text: ###{text}###)PROMPT";

const char* kSubjectUserTextSummary = R"PROMPT(You are a summarization assistant to summarize following text and return ONLY the summary to me.
Here is the text ###{text}###)PROMPT";

const char* kSubjectCombinedSummary = R"PROMPT(You are a summarization assistant. The retrieval text is relevant with the user's text and there is no information conflict. Write one summary that combines them without losing information from either.

Here is the user text: ###{user_text}###

Here is the retrieval text: ###{retrieval_text}###)PROMPT";

const char* kSubjectFirstStepSummary = R"PROMPT(You are a summarization assistant summarizing documents one by one. There is no context yet. Write the summarization of the first relevant retrieval text regarding the user's topic.

Here is the topic: ###{topic}###

Here is the retrieval text: ###{retrieval_text}###)PROMPT";

const char* kSubjectStepSummary = R"PROMPT(You are a summarization assistant summarizing documents one by one. Combine the context and the new retrieval text into one updated summarization. DO NOT LOSE ANY INFORMATION IN THE CONTEXT.

Here is the context: ###{context}###

Here is the retrieval text: ###{retrieval_text}###)PROMPT";

const char* kGenTopicExtract = R"PROMPT(Extract the topic of the following text for retrieval. Reply with the topic phrase only.

Here is the text: ###{text}###)PROMPT";

const char* kGenInjectConflict = R"PROMPT(You are instructed to rewrite the following text to introduce an information conflict of kind {kind}. The kinds are: NumberChange (change a number), FactualReversal (reverse a factual statement), DateAlteration (alter a date). Change as little of the text as possible and return ONLY the rewritten text.

Here is the text: ###{text}###)PROMPT";

// Benchmarking prompts for instruct models that never saw the token
// vocabulary. One prompt per aspect, shared by that aspect's scenarios.

const char* kEvalAspect1ZeroShot = R"PROMPT(You are given following task based on the given text. Here is the text: ###{text}###. You first check if the text is relevant with the ###{topic}###. Using following answer format:

(1) if it is relevant, return me using following format "The retrieval text is relevant with user's topic. Start summarizing on it: content of the summarization"

(2) if it is not relevant, return me using following format "The retrieval text is not relevant with user's topic"

Here is your reply:)PROMPT";

const char* kEvalAspect1Cot = R"PROMPT(You are given following task based on the given text. Here is the text: ###{text}###. You first check if the text is relevant with the ###{topic}###. You are required to finish the task step by step:

The first step is to determine the relevancy of the retrieval text to the user topic.

Then the second step is based on the result of the relevancy:

(1) if it is relevant, return me using following format "The retrieval text is relevant with user's topic. Start summarizing on it: content of the summarization"

(2) if it is not relevant, return me using following format "The retrieval text is not relevant with user's topic"

Here is your reply:)PROMPT";

const char* kEvalAspect1OneShotCot = R"PROMPT(You are given following task based on the given text. Here is the text: ###{text}###. You first check if the text is relevant with the ###{topic}###. You are required to finish the task step by step:

The first step is to determine the relevancy of the retrieval text to the user topic.

Then the second step is based on the result of the relevancy:

(1) if it is relevant, return me using following format "The retrieval text is relevant with user's topic. Start summarizing on it: content of the summarization"

(2) if it is not relevant, return me using following format "The retrieval text is not relevant with user's topic"

Here is an example:

The user topic would like to know the summary about ChatGPT application in Finance. The retrieval text is ### ChatGPT is a chatbot developed by OpenAI and launched on November 30, 2022. Based on a large language model, it enables users to refine and steer a conversation towards a desired length, format, style, level of detail, and language ###. Then, you need to output it is not relevant since the user asks the specific finance application of ChatGPT but the retrieval text reflects the ChatGPT introduction.

Here is your reply:)PROMPT";

const char* kEvalAspect2ZeroShot = R"PROMPT(You are a summarization assistant to summarize following text and return ONLY the summary to me.
Here is the text ###{user_text}###)PROMPT";

const char* kEvalAspect3ZeroShot = R"PROMPT(You are given two tasks based on the given two texts. Here is the user text: ###{user_text}###. Here is the retrieval text: ###{retrieval_text}###. You first check if the retrieval text is relevant with the user text, and if it is relevant, check if there is any information conflict between the retrieval text and the user text. Using following format:

(1) if they are not relevant, you should return to me: the user text is not relevant with the retrieval text. Start summarizing only on user text: content of the summarization

(2) if they are relevant but the retrieval text has information conflict with the user text, you only need to return "There is information conflict between the user text and the retrieval text"

(3) if they are relevant and there is no information conflict between them, you should return to me: the user text is relevant with the retrieval text and there is no information conflict. Start summarizing on both retrieval text and user text: content of the summarization.)PROMPT";

const char* kEvalAspect3Cot = R"PROMPT(You are instructed to finish following text step by step. Here is the user text: ###{user_text}###. Here is the retrieval text: ###{retrieval_text}###.
The first step is to check if the retrieval text is relevant with the user text. Based on the check result, you are ready to implement the following step.
(1) if they are not relevant, you should return to me: the user text is not relevant with the retrieval text. Start summarizing only on user text: content of the summarization

(2) if they are relevant but the retrieval text has information conflict with the user text, you only need to return "There is information conflict between the user text and the retrieval text"

(3) if they are relevant and there is no information conflict between them, you should return to me: the user text is relevant with the retrieval text and there is no information conflict. Start summarizing on both retrieval text and user text: content of the summarization.)PROMPT";

const char* kEvalAspect3OneShotCot = R"PROMPT(You are instructed to finish following text step by step. Here is the user text: ###{user_text}###. Here is the retrieval text: ###{retrieval_text}###.
The first step is to check if the retrieval text is relevant with the user text. Based on the check result, you are ready to implement the following step.
(1) if they are not relevant, you should return to me: the user text is not relevant with the retrieval text. Start summarizing only on user text: content of the summarization

(2) if they are relevant but the retrieval text has information conflict with the user text, you only need to return "There is information conflict between the user text and the retrieval text"

(3) if they are relevant and there is no information conflict between them, you should return to me: the user text is relevant with the retrieval text and there is no information conflict. Start summarizing on both retrieval text and user text: content of the summarization.

Here is one example: The user text is ### The Ragdoll is a breed of cat with a distinct colorpoint coat and blue eyes. Its morphology is large and weighty, and it has a semi-long and silky soft coat. American breeder Ann Baker developed Ragdolls in the 1960s. They are best known for their docile, placid temperament and affectionate nature. ###

The retrieval text is ### A domestic short-haired cat is a cat possessing a coat of short fur, not belonging to any particular recognised cat breed. In the United Kingdom, they are colloquially called moggies. ### Then, in this example, your reply should be: The user text is not relevant with the retrieval text. Start summarizing only on user text: Ragdolls are large, gentle cats with colorpoint coats and blue eyes.)PROMPT";

// Framework baselines for the multi-document comparison.

const char* kBaselineStuff = R"PROMPT(Write a summary of the following text regarding topic {topic} and skip irrelevant text with respect to this topic.

Here is the text: {text})PROMPT";

const char* kBaselineMap = R"PROMPT(Write a summary of this chunk of text regarding topic {topic} that includes the main points and any important details (skip irrelevant text with respect to this topic.)

Here is the text: {text})PROMPT";

const char* kBaselineReduce = R"PROMPT(Write a concise summary of the following text delimited by triplet backquotes. ```{text}```

Here is your summary:)PROMPT";

const char* kBaselineRefineQuestion = R"PROMPT(Provide a summary of the following text with respect to topic {topic} (skip irrelevant text with respect to the topic):

TEXT: {text}

SUMMARY:)PROMPT";

const char* kBaselineRefineRefine = R"PROMPT(Write a concise summary of the following text delimited by triple backquotes.

```{text}```

SUMMARY:)PROMPT";

const std::unordered_map<std::string_view, const char*>& table() {
  static const std::unordered_map<std::string_view, const char*> t = {
      {"gen.top1", kGenTop1},
      {"gen.top1.one_shot", kGenTop1OneShot},
      {"gen.direct", kGenDirect},
      {"gen.direct.one_shot", kGenDirectOneShot},
      {"gen.combined.ignore", kGenCombinedIgnore},
      {"gen.combined.ignore.one_shot", kGenCombinedOneShot},
      {"gen.combined.augment", kGenCombinedAugment},
      {"gen.combined.augment.one_shot", kGenCombinedAugmentOneShot},
      {"gen.combined.conflict", kGenCombinedConflict},
      {"gen.combined.conflict.one_shot", kGenCombinedConflictOneShot},
      {"gen.topic_pool", kGenTopicPool},
      {"gen.doc_pair", kGenDocPair},
      {"gen.multi.start", kGenMultiStart},
      {"gen.multi.start.relevant_example", kGenMultiStartRelevantExample},
      {"gen.multi.start.irrelevant_example", kGenMultiStartIrrelevantExample},
      {"gen.multi.mid", kGenMultiMid},
      {"gen.multi.mid.example", kGenMultiMidExample},
      {"gen.multi.end", kGenMultiEnd},
      {"gen.topic_extract", kGenTopicExtract},
      {"gen.inject_conflict", kGenInjectConflict},
      {"judge.relevance", kJudgeRelevance},
      {"judge.text_relevance", kJudgeTextRelevance},
      {"judge.conflict", kJudgeConflict},
      {"judge.logic", kJudgeLogic},
      {"subject.topic_summary", kSubjectTopicSummary},
      {"subject.user_text_summary", kSubjectUserTextSummary},
      {"subject.combined_summary", kSubjectCombinedSummary},
      {"subject.first_step_summary", kSubjectFirstStepSummary},
      {"subject.step_summary", kSubjectStepSummary},
      {"eval.aspect1.zero_shot", kEvalAspect1ZeroShot},
      {"eval.aspect1.cot", kEvalAspect1Cot},
      {"eval.aspect1.one_shot_cot", kEvalAspect1OneShotCot},
      {"eval.aspect2.zero_shot", kEvalAspect2ZeroShot},
      {"eval.aspect3.zero_shot", kEvalAspect3ZeroShot},
      {"eval.aspect3.cot", kEvalAspect3Cot},
      {"eval.aspect3.one_shot_cot", kEvalAspect3OneShotCot},
      {"baseline.stuff", kBaselineStuff},
      {"baseline.map", kBaselineMap},
      {"baseline.reduce", kBaselineReduce},
      {"baseline.refine.question", kBaselineRefineQuestion},
      {"baseline.refine.refine", kBaselineRefineRefine},
  };
  return t;
}

}  // namespace

const std::string& text(std::string_view id) {
  static std::unordered_map<std::string_view, std::string> cache = [] {
    std::unordered_map<std::string_view, std::string> c;
    for (const auto& [key, value] : table()) c.emplace(key, value);
    return c;
  }();
  auto it = cache.find(id);
  if (it == cache.end()) {
    throw PreconditionError("unknown prompt id: " + std::string(id));
  }
  return it->second;
}

std::string render(std::string_view id, const std::map<std::string, std::string>& vars) {
  std::string out = text(id);
  for (const auto& [name, value] : vars) {
    const std::string needle = "{" + name + "}";
    std::size_t pos = 0;
    while ((pos = out.find(needle, pos)) != std::string::npos) {
      out.replace(pos, needle.size(), value);
      pos += value.size();
    }
  }
  return out;
}

std::vector<std::string_view> ids() {
  std::vector<std::string_view> out;
  out.reserve(table().size());
  for (const auto& [key, _] : table()) out.push_back(key);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace summrag::prompts
