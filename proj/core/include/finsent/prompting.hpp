#pragma once

#include "finsent/common.hpp"

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace finsent {

enum class IdentifierTerm { input, news, tweet };

inline constexpr std::array<IdentifierTerm, 3> kAllIdentifiers{
    IdentifierTerm::input, IdentifierTerm::news, IdentifierTerm::tweet};

[[nodiscard]] std::string_view to_string(IdentifierTerm t) noexcept;
[[nodiscard]] IdentifierTerm identifier_from_string(std::string_view s);

/// The annotators' instruction: a definition per class, a grounding sentence
/// tying positive/negative/neutral to bullish/bearish/stable, and one example
/// text per class. Arrays are indexed by SentimentLabel.
struct InstructionSpec {
    std::array<std::string, 3> definition;
    std::string grounding;
    std::array<std::string, 3> example;

    /// Throws ContractError when any component is blank.
    void validate() const;

    [[nodiscard]] static InstructionSpec bundled_default();
    /// JSON with keys definition.{positive,negative,neutral}, grounding and
    /// example.{positive,negative,neutral}.text, either nested or as flat
    /// dotted keys.
    [[nodiscard]] static InstructionSpec from_json_text(std::string_view text);
    [[nodiscard]] static InstructionSpec load(const std::filesystem::path& path);
};

/// Instruction components, in the order they are rendered.
struct Components {
    bool definition = false;
    bool grounding = false;
    bool example = false;

    [[nodiscard]] bool empty() const noexcept { return !definition && !grounding && !example; }
    [[nodiscard]] std::string tag() const;  // "D", "D+G", "D+G+E", ...

    static constexpr Components none() { return {}; }
    static constexpr Components d() { return {true, false, false}; }
    static constexpr Components dg() { return {true, true, false}; }
    static constexpr Components dge() { return {true, true, true}; }

    /// Parses a tag such as "D+G" (case-insensitive, order-free).
    [[nodiscard]] static Components parse(std::string_view tag);

    friend bool operator==(const Components&, const Components&) = default;
};

using Shot = std::pair<std::string, SentimentLabel>;

struct PromptSpec {
    IdentifierTerm identifier = IdentifierTerm::input;
    Components components{};
    std::vector<Shot> shots;

    /// Few-shot and AIAP are separate families; both at once is rejected.
    void validate() const;
    [[nodiscard]] std::string family_tag() const;  // "base", "aiap:D+G", "2-S"
};

struct PromptSection {
    std::string name;
    std::size_t offset = 0;
    std::size_t length = 0;
};

class PromptText {
public:
    [[nodiscard]] const std::string& rendered() const noexcept { return rendered_; }
    [[nodiscard]] const std::vector<PromptSection>& sections() const noexcept { return sections_; }

    [[nodiscard]] std::string_view section_text(const PromptSection& s) const {
        return std::string_view(rendered_).substr(s.offset, s.length);
    }
    /// Bytes of all annotator-instruction sections (empty for base/few-shot).
    [[nodiscard]] std::string_view annotator_block() const;
    [[nodiscard]] std::size_t count_sections(std::string_view name) const;
    /// The sample text of the final `Input:` section.
    [[nodiscard]] std::string_view target_text() const;

    void append(std::string name, std::string_view text);

private:
    std::string rendered_;
    std::vector<PromptSection> sections_;
};

[[nodiscard]] PromptText build_base_prompt(std::string_view text, IdentifierTerm identifier);

[[nodiscard]] PromptText build_aiap_prompt(std::string_view text, IdentifierTerm identifier,
                                           const InstructionSpec& spec, Components components);

/// Shots render as completed `Input:`/`Answer:` pairs; 1 to 3 shots.
[[nodiscard]] PromptText build_few_shot_prompt(std::string_view text, IdentifierTerm identifier,
                                               const std::vector<Shot>& shots);

/// The instruction examples as shots in the fixed order positive, negative,
/// neutral, truncated to k.
[[nodiscard]] std::vector<Shot> shots_from_spec(const InstructionSpec& spec, std::size_t k);

/// Dispatches on the PromptSpec family.
[[nodiscard]] PromptText render_prompt(std::string_view text, const PromptSpec& spec,
                                       const InstructionSpec& instruction);

}  // namespace finsent
