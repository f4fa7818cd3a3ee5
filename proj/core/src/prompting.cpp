#include "finsent/prompting.hpp"

#include <json.hpp>

#include <fstream>
#include <iterator>

namespace finsent {

using nlohmann::json;

namespace {

// Prompts always use LF line endings, whatever the sample text carried.
// Appends `text` with CRLF and lone CR turned into LF.
void append_normalized(std::string& out, std::string_view text) {
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\r') {
            out.push_back('\n');
            if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        } else {
            out.push_back(text[i]);
        }
    }
}

std::string normalize_newlines(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    append_normalized(out, text);
    return out;
}

void append_item(std::string& block, SentimentLabel label, std::string_view text) {
    block += "- ";
    block += to_string(label);
    block += ": ";
    append_normalized(block, text);
    block += '\n';
}

std::string require_text(std::string_view text) {
    if (trim(text).empty()) throw ContractError("prompt sample text must be nonempty");
    return normalize_newlines(text);
}

std::string instruction_line(IdentifierTerm identifier) {
    return "Instruction: What is the sentiment of this " + std::string(to_string(identifier)) +
           "? Please choose an answer from {negative/neutral/positive}\n";
}

void append_target(PromptText& prompt, const std::string& text) {
    prompt.append("input", "Input: " + text + "\n");
    prompt.append("answer_cue", "Answer: ");
}

const json* lookup(const json& root, std::string_view dotted) {
    if (auto flat = root.find(std::string(dotted)); flat != root.end()) return &*flat;
    const json* node = &root;
    for (const auto& part : split(dotted, '.')) {
        if (!node->is_object()) return nullptr;
        auto it = node->find(part);
        if (it == node->end()) return nullptr;
        node = &*it;
    }
    return node;
}

std::string get_text(const json& root, std::string_view dotted) {
    const json* node = lookup(root, dotted);
    if (node == nullptr) throw ParseError("instruction spec is missing '" + std::string(dotted) + "'");
    if (!node->is_string()) throw ParseError("instruction spec key '" + std::string(dotted) + "' must be a string");
    return node->get<std::string>();
}

}  // namespace

std::string_view to_string(IdentifierTerm t) noexcept {
    switch (t) {
        case IdentifierTerm::input: return "input";
        case IdentifierTerm::news: return "news";
        case IdentifierTerm::tweet: return "tweet";
    }
    return "input";
}

IdentifierTerm identifier_from_string(std::string_view s) {
    const auto k = to_lower(trim(s));
    for (auto t : kAllIdentifiers) {
        if (k == to_string(t)) return t;
    }
    throw ParseError("identifier must be one of input, news, tweet; got '" + std::string(s) + "'");
}

void InstructionSpec::validate() const {
    for (auto l : kAllLabels) {
        if (trim(definition[index_of(l)]).empty()) {
            throw ContractError("instruction spec has no definition for " + std::string(to_string(l)));
        }
        if (trim(example[index_of(l)]).empty()) {
            throw ContractError("instruction spec has no example for " + std::string(to_string(l)));
        }
    }
    if (trim(grounding).empty()) throw ContractError("instruction spec has an empty grounding");
}

InstructionSpec InstructionSpec::bundled_default() {
    InstructionSpec spec;
    spec.definition[index_of(SentimentLabel::positive)] =
        "optimistic, confident or approving; the author expects the stock or the market to gain value.";
    spec.definition[index_of(SentimentLabel::negative)] =
        "pessimistic, fearful or disapproving; the author expects the stock or the market to lose value.";
    spec.definition[index_of(SentimentLabel::neutral)] =
        "factual, undecided or mixed; the author states no clear expectation about the price direction.";
    spec.grounding =
        "In financial text positive is also called bullish, negative is also called bearish, "
        "and neutral is also called stable.";
    spec.example[index_of(SentimentLabel::positive)] =
        "Just bought more GME calls, this squeeze is only getting started.";
    spec.example[index_of(SentimentLabel::negative)] =
        "Sold all my shares, this company is heading for bankruptcy.";
    spec.example[index_of(SentimentLabel::neutral)] =
        "Earnings are scheduled for Thursday after the market closes.";
    return spec;
}

InstructionSpec InstructionSpec::from_json_text(std::string_view text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("instruction spec is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ParseError("instruction spec must be a JSON object");
    InstructionSpec spec;
    for (auto l : kAllLabels) {
        const std::string name(to_string(l));
        spec.definition[index_of(l)] = get_text(root, "definition." + name);
        spec.example[index_of(l)] = get_text(root, "example." + name + ".text");
    }
    spec.grounding = get_text(root, "grounding");
    spec.validate();
    return spec;
}

InstructionSpec InstructionSpec::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open instruction spec '" + path.string() + "'");
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return from_json_text(text);
}

std::string Components::tag() const {
    std::string out;
    auto add = [&](bool on, const char* letter) {
        if (!on) return;
        if (!out.empty()) out += '+';
        out += letter;
    };
    add(definition, "D");
    add(grounding, "G");
    add(example, "E");
    return out.empty() ? "none" : out;
}

Components Components::parse(std::string_view tag) {
    Components c;
    for (const auto& part : split(to_upper(trim(tag)), '+')) {
        const auto p = trim(part);
        if (p == "D" || p == "DEFINITION") {
            c.definition = true;
        } else if (p == "G" || p == "GROUNDING") {
            c.grounding = true;
        } else if (p == "E" || p == "EXAMPLE" || p == "EXAMPLES") {
            c.example = true;
        } else {
            throw ParseError("unknown instruction component '" + std::string(p) + "'");
        }
    }
    return c;
}

void PromptSpec::validate() const {
    if (!shots.empty() && !components.empty()) {
        throw ContractError("a prompt cannot mix few-shot examples with annotator-instruction components");
    }
    if (shots.size() > 3) throw ContractError("few-shot prompts take at most 3 shots");
}

std::string PromptSpec::family_tag() const {
    if (!shots.empty()) return std::to_string(shots.size()) + "-S";
    if (!components.empty()) return "aiap:" + components.tag();
    return "base";
}

std::string_view PromptText::annotator_block() const {
    std::size_t begin = rendered_.size();
    std::size_t end = 0;
    for (const auto& s : sections_) {
        if (s.name == "definition" || s.name == "grounding" || s.name == "example") {
            begin = std::min(begin, s.offset);
            end = std::max(end, s.offset + s.length);
        }
    }
    if (begin >= end) return {};
    return std::string_view(rendered_).substr(begin, end - begin);
}

std::size_t PromptText::count_sections(std::string_view name) const {
    std::size_t n = 0;
    for (const auto& s : sections_) n += s.name == name ? 1 : 0;
    return n;
}

std::string_view PromptText::target_text() const {
    for (auto it = sections_.rbegin(); it != sections_.rend(); ++it) {
        if (it->name != "input") continue;
        constexpr std::string_view prefix = "Input: ";
        // "Input: " + text + "\n"
        return section_text(*it).substr(prefix.size(), it->length - prefix.size() - 1);
    }
    return {};
}

void PromptText::append(std::string name, std::string_view text) {
    sections_.push_back({std::move(name), rendered_.size(), text.size()});
    rendered_.append(text);
}

PromptText build_base_prompt(std::string_view text, IdentifierTerm identifier) {
    const auto body = require_text(text);
    PromptText prompt;
    prompt.append("instruction", instruction_line(identifier));
    append_target(prompt, body);
    return prompt;
}

PromptText build_aiap_prompt(std::string_view text, IdentifierTerm identifier, const InstructionSpec& spec,
                             Components components) {
    if (components.empty()) {
        throw ContractError("AIAP prompt needs at least one instruction component; use build_base_prompt");
    }
    spec.validate();
    const auto body = require_text(text);

    PromptText prompt;
    prompt.append("instruction", instruction_line(identifier));
    std::string block;
    block.reserve(1024);
    if (components.definition) {
        block = "Definitions:\n";
        for (auto l : kAllLabels) append_item(block, l, spec.definition[index_of(l)]);
        prompt.append("definition", block);
    }
    if (components.grounding) {
        block = "Grounding: ";
        append_normalized(block, spec.grounding);
        block += '\n';
        prompt.append("grounding", block);
    }
    if (components.example) {
        block = "Examples:\n";
        for (auto l : kAllLabels) append_item(block, l, spec.example[index_of(l)]);
        prompt.append("example", block);
    }
    append_target(prompt, body);
    return prompt;
}

PromptText build_few_shot_prompt(std::string_view text, IdentifierTerm identifier, const std::vector<Shot>& shots) {
    if (shots.empty()) throw ContractError("few-shot prompt needs at least one shot");
    if (shots.size() > 3) throw ContractError("few-shot prompts take at most 3 shots");
    const auto body = require_text(text);

    PromptText prompt;
    prompt.append("instruction", instruction_line(identifier));
    for (const auto& [shot_text, label] : shots) {
        prompt.append("shot_input", "Input: " + require_text(shot_text) + "\n");
        prompt.append("shot_answer", "Answer: " + std::string(to_string(label)) + "\n");
    }
    append_target(prompt, body);
    return prompt;
}

std::vector<Shot> shots_from_spec(const InstructionSpec& spec, std::size_t k) {
    if (k > 3) throw ContractError("the instruction spec provides only 3 examples");
    std::vector<Shot> shots;
    for (std::size_t i = 0; i < k; ++i) {
        const auto l = kAllLabels[i];
        shots.emplace_back(spec.example[index_of(l)], l);
    }
    return shots;
}

PromptText render_prompt(std::string_view text, const PromptSpec& spec, const InstructionSpec& instruction) {
    spec.validate();
    if (!spec.shots.empty()) return build_few_shot_prompt(text, spec.identifier, spec.shots);
    if (!spec.components.empty()) return build_aiap_prompt(text, spec.identifier, instruction, spec.components);
    return build_base_prompt(text, spec.identifier);
}

}  // namespace finsent
