#include "summrag/dataset.hpp"

#include <fstream>

#include "summrag/errors.hpp"
#include "summrag/util.hpp"

namespace summrag {
namespace {

using nlohmann::json;

constexpr std::string_view kBlockOpen = "⟨s⟩[INST] ";
constexpr std::string_view kBlockSep = " [/INST] ";
constexpr std::string_view kBlockClose = "⟨/s⟩";

void check_spans(const std::vector<ByteSpan>& spans, std::size_t limit,
                 const std::string& where) {
  std::size_t previous_end = 0;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const auto [begin, end] = spans[i];
    if (begin > end || end > limit) {
      throw PreconditionError(where + ": mask span " + std::to_string(i) + " is out of bounds");
    }
    if (i > 0 && begin < previous_end) {
      throw PreconditionError(where + ": mask spans overlap or are unsorted at index " +
                              std::to_string(i));
    }
    previous_end = end;
  }
}

// Byte ranges of the text between each paragraph marker pair, given the
// per-segment output ranges of a rendered or transformed turn.
std::vector<ByteSpan> paragraph_spans(const AnnotatedTurn& turn,
                                      const std::vector<ByteSpan>& segment_ranges) {
  std::vector<ByteSpan> spans;
  bool inside = false;
  std::size_t payload_begin = 0;
  for (std::size_t i = 0; i < turn.segments.size(); ++i) {
    const Segment& seg = turn.segments[i];
    if (seg.is_token() && *seg.token == SpecialToken::ParagraphOpen) {
      inside = true;
      payload_begin = segment_ranges[i].second;
    } else if (seg.is_token() && *seg.token == SpecialToken::ParagraphClose) {
      if (inside) {
        const std::size_t payload_end = segment_ranges[i].first;
        if (payload_end > payload_begin) spans.emplace_back(payload_begin, payload_end);
      }
      inside = false;
    }
  }
  return spans;
}

// Segment ranges for the canonical token rendering (render_turn output).
std::vector<ByteSpan> rendered_ranges(const AnnotatedTurn& turn) {
  std::vector<ByteSpan> ranges;
  ranges.reserve(turn.segments.size());
  std::size_t offset = 0;
  for (const auto& seg : turn.segments) {
    const std::size_t size =
        seg.is_token() ? surface(*seg.token).size() : seg.text.size();
    ranges.emplace_back(offset, offset + size);
    offset += size;
  }
  return ranges;
}

AnnotatedTurn text_turn(Role role, std::string text) {
  AnnotatedTurn turn;
  turn.role = role;
  turn.segments.push_back(Segment::txt(std::move(text)));
  return turn;
}

std::string dialogue_id_of(const Dialogue& d) {
  const auto it = d.metadata.find("dialogue_id");
  return it == d.metadata.end() ? std::string() : it->second;
}

TransformedText transform_or_rethrow(const AnnotatedTurn& turn, const TransformationTable& table,
                                     std::size_t turn_index) {
  try {
    return transform_segments(turn, table, RelevanceBranch::Auto);
  } catch (const TransformError& e) {
    throw TransformError("turn " + std::to_string(turn_index) + ": " + e.what());
  }
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open " + path + " for reading");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

template <typename Record, typename Parser>
std::vector<Record> import_records(const std::string& path, Parser parse) {
  const std::vector<std::string> lines = read_lines(path);
  std::vector<Record> records;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    try {
      records.push_back(parse(json::parse(lines[i])));
    } catch (const json::exception& e) {
      throw PreconditionError(path + " line " + std::to_string(i + 1) + ": " + e.what());
    } catch (const PreconditionError& e) {
      throw PreconditionError(path + " line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return records;
}

template <typename Record>
std::size_t export_records(const std::vector<Record>& records, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw PreconditionError("cannot open " + path + " for writing");
  for (const auto& record : records) out << to_json(record).dump() << "\n";
  out.flush();
  if (!out) throw PreconditionError("write to " + path + " failed");
  return records.size();
}

std::vector<ByteSpan> spans_from_json(const json& j) {
  std::vector<ByteSpan> spans;
  for (const auto& item : j) {
    if (!item.is_array() || item.size() != 2) {
      throw PreconditionError("mask span must be a [start, end] pair");
    }
    spans.emplace_back(item.at(0).get<std::size_t>(), item.at(1).get<std::size_t>());
  }
  return spans;
}

json spans_to_json(const std::vector<ByteSpan>& spans) {
  json out = json::array();
  for (const auto& [begin, end] : spans) out.push_back(json::array({begin, end}));
  return out;
}

void require_schema(const json& j, std::string_view expected) {
  const std::string found = j.value("schema", "");
  if (found != expected) {
    throw PreconditionError("expected schema '" + std::string(expected) + "', found '" + found +
                            "'");
  }
}

}  // namespace

Dialogue detokenize(const Dialogue& d, const TransformationTable& table) {
  Dialogue out;
  out.scenario = d.scenario;
  out.metadata = d.metadata;
  bool prefixed = false;
  for (std::size_t i = 0; i < d.turns.size(); ++i) {
    const AnnotatedTurn& turn = d.turns[i];
    std::string text = transform_or_rethrow(turn, table, i).text;
    if (!prefixed && turn.role == Role::user) {
      text = table.prefix(aspect_of(d.scenario)) + "\n" + text;
      prefixed = true;
    }
    out.turns.push_back(text_turn(turn.role, std::move(text)));
  }
  return out;
}

TemplatedSample to_chat_template(const std::vector<AnnotatedTurn>& turns) {
  if (turns.size() % 2 != 0) {
    throw TemplatingError("dangling user turn: " + std::to_string(turns.size()) +
                          " turns do not pair up");
  }
  TemplatedSample sample;
  for (std::size_t i = 0; i < turns.size(); i += 2) {
    if (turns[i].role != Role::user || turns[i + 1].role != Role::assistant) {
      throw TemplatingError("turns " + std::to_string(i) + "/" + std::to_string(i + 1) +
                            " do not form a user/assistant pair");
    }
    const std::size_t block_begin = sample.text.size();
    sample.text += kBlockOpen;
    sample.text += render_turn(turns[i]);
    sample.text += kBlockSep;
    const std::size_t response_begin = sample.text.size();
    sample.text += render_turn(turns[i + 1]);
    sample.text += kBlockClose;
    sample.loss_mask.emplace_back(block_begin, response_begin);
  }
  return sample;
}

TemplatedSample to_chat_template(const TrainingPair& pair) {
  check_spans(pair.mask_spans, pair.response.size(), "training pair");
  TemplatedSample sample;
  sample.text = std::string(kBlockOpen) + pair.instruction + std::string(kBlockSep);
  const std::size_t response_begin = sample.text.size();
  sample.text += pair.response;
  sample.text += kBlockClose;
  sample.loss_mask.emplace_back(0, response_begin);
  for (const auto& [begin, end] : pair.mask_spans) {
    sample.loss_mask.emplace_back(response_begin + begin, response_begin + end);
  }
  return sample;
}

std::vector<TrainingPair> extract_adjacent_pairs(const Dialogue& d) {
  if (d.turns.size() < 2) {
    throw PreconditionError("adjacent-pair extraction needs at least two turns");
  }
  if (classify_scenario(d) != Scenario::S7) {
    throw PreconditionError("adjacent-pair extraction applies to multi-document dialogues only");
  }
  std::vector<TrainingPair> pairs;
  pairs.reserve(d.turns.size() - 1);
  const std::string id = dialogue_id_of(d);
  for (std::size_t i = 0; i + 1 < d.turns.size(); ++i) {
    const AnnotatedTurn& response_turn = d.turns[i + 1];
    TrainingPair pair;
    pair.instruction = render_turn(d.turns[i]);
    pair.response = render_turn(response_turn);
    pair.mask_spans = paragraph_spans(response_turn, rendered_ranges(response_turn));
    pair.aspect = Aspect::TopK;
    pair.dialogue_id = id;
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

std::vector<TrainingPair> build_training_pairs(const Dialogue& d,
                                               const TransformationTable& table) {
  const std::string id = dialogue_id_of(d);
  std::vector<TrainingPair> pairs;

  if (aspect_of(d.scenario) == Aspect::TopK) {
    if (d.turns.size() < 2) {
      throw PreconditionError("adjacent-pair extraction needs at least two turns");
    }
    for (std::size_t i = 0; i + 1 < d.turns.size(); ++i) {
      TrainingPair pair;
      pair.instruction = transform_or_rethrow(d.turns[i], table, i).text;
      if (i == 0 && d.turns[0].role == Role::user) {
        pair.instruction = table.prefix(Aspect::TopK) + "\n" + pair.instruction;
      }
      const TransformedText response = transform_or_rethrow(d.turns[i + 1], table, i + 1);
      pair.response = response.text;
      pair.mask_spans = paragraph_spans(d.turns[i + 1], response.segment_ranges);
      pair.aspect = Aspect::TopK;
      pair.dialogue_id = id;
      pairs.push_back(std::move(pair));
    }
    return pairs;
  }

  const Dialogue plain = detokenize(d, table);
  std::string pending;
  for (const auto& turn : plain.turns) {
    const std::string text = turn.plain_text();
    if (turn.role == Role::user) {
      if (!pending.empty()) pending += "\n";
      pending += text;
      continue;
    }
    TrainingPair pair;
    pair.instruction = pending;
    pair.response = text;
    pair.aspect = aspect_of(d.scenario);
    pair.dialogue_id = id;
    pairs.push_back(std::move(pair));
    pending.clear();
  }
  return pairs;
}

json to_json(const TrainingPair& pair) {
  return json{{"schema", kTrainingPairSchema},
              {"instruction", pair.instruction},
              {"response", pair.response},
              {"mask_spans", spans_to_json(pair.mask_spans)},
              {"aspect", to_string(pair.aspect)},
              {"dialogue_id", pair.dialogue_id}};
}

TrainingPair training_pair_from_json(const json& j) {
  require_schema(j, kTrainingPairSchema);
  TrainingPair pair;
  pair.instruction = j.at("instruction").get<std::string>();
  pair.response = j.at("response").get<std::string>();
  pair.mask_spans = spans_from_json(j.at("mask_spans"));
  const std::string aspect_name = j.at("aspect").get<std::string>();
  const auto aspect = aspect_from_string(aspect_name);
  if (!aspect) throw PreconditionError("unknown aspect '" + aspect_name + "'");
  pair.aspect = *aspect;
  pair.dialogue_id = j.at("dialogue_id").get<std::string>();
  check_spans(pair.mask_spans, pair.response.size(), "training pair");
  return pair;
}

json to_json(const TemplatedSample& sample) {
  return json{{"schema", kTemplatedSchema},
              {"text", sample.text},
              {"loss_mask", spans_to_json(sample.loss_mask)}};
}

TemplatedSample templated_from_json(const json& j) {
  require_schema(j, kTemplatedSchema);
  TemplatedSample sample;
  sample.text = j.at("text").get<std::string>();
  sample.loss_mask = spans_from_json(j.at("loss_mask"));
  check_spans(sample.loss_mask, sample.text.size(), "templated sample");
  return sample;
}

std::size_t export_jsonl(const std::vector<TrainingPair>& pairs, const std::string& path) {
  return export_records(pairs, path);
}

std::size_t export_jsonl(const std::vector<TemplatedSample>& samples, const std::string& path) {
  return export_records(samples, path);
}

std::vector<TrainingPair> import_training_pairs(const std::string& path) {
  return import_records<TrainingPair>(path, training_pair_from_json);
}

std::vector<TemplatedSample> import_templated_samples(const std::string& path) {
  return import_records<TemplatedSample>(path, templated_from_json);
}

}  // namespace summrag
