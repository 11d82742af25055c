#pragma once

// Compiles the layered system prompt from a pack: identity, negative
// constraints, grammar rules, few-shot examples, self-verification. Versions
// v1..v4 build the stack up incrementally; ablations knock layers out of the
// full system; layer order is configurable. Compilation is pure: identical
// pack and config give an identical prompt and content hash.

#include <array>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tulukit/grammar_pack.hpp"
#include "tulukit/hash.hpp"
#include "tulukit/language_pack.hpp"
#include "tulukit/rng.hpp"
#include "tulukit/token_counter.hpp"

#include "json.hpp"

namespace tulu {

enum class LayerKind {
    identity, negative_constraints, grammar_rules, few_shot_examples, self_verification
};

inline constexpr std::array<LayerKind, 5> kDefaultLayerOrder = {
    LayerKind::identity, LayerKind::negative_constraints, LayerKind::grammar_rules,
    LayerKind::few_shot_examples, LayerKind::self_verification};

inline std::string to_string(LayerKind k) {
    switch (k) {
        case LayerKind::identity: return "identity";
        case LayerKind::negative_constraints: return "negative_constraints";
        case LayerKind::grammar_rules: return "grammar_rules";
        case LayerKind::few_shot_examples: return "few_shot_examples";
        case LayerKind::self_verification: return "self_verification";
    }
    return "?";
}

inline LayerKind layer_kind_from_string(const std::string& s) {
    for (LayerKind k : kDefaultLayerOrder)
        if (to_string(k) == s) return k;
    throw ParseError("unknown layer kind: " + s);
}

enum class PromptVersion { v1, v2, v3, v4 };

inline std::string to_string(PromptVersion v) {
    switch (v) {
        case PromptVersion::v1: return "v1";
        case PromptVersion::v2: return "v2";
        case PromptVersion::v3: return "v3";
        case PromptVersion::v4: return "v4";
    }
    return "v1";
}

inline PromptVersion version_from_string(const std::string& s) {
    if (s == "v1") return PromptVersion::v1;
    if (s == "v2") return PromptVersion::v2;
    if (s == "v3") return PromptVersion::v3;
    if (s == "v4") return PromptVersion::v4;
    throw ParseError("unknown prompt version: " + s);
}

enum class Ablation { no_constraints, no_grammar, no_examples, no_verification };

inline std::string to_string(Ablation a) {
    switch (a) {
        case Ablation::no_constraints: return "no_constraints";
        case Ablation::no_grammar: return "no_grammar";
        case Ablation::no_examples: return "no_examples";
        case Ablation::no_verification: return "no_verification";
    }
    return "?";
}

inline Ablation ablation_from_string(const std::string& s) {
    if (s == "no_constraints") return Ablation::no_constraints;
    if (s == "no_grammar") return Ablation::no_grammar;
    if (s == "no_examples") return Ablation::no_examples;
    if (s == "no_verification") return Ablation::no_verification;
    throw ParseError("unknown ablation: " + s);
}

inline LayerKind ablated_kind(Ablation a) {
    switch (a) {
        case Ablation::no_constraints: return LayerKind::negative_constraints;
        case Ablation::no_grammar: return LayerKind::grammar_rules;
        case Ablation::no_examples: return LayerKind::few_shot_examples;
        case Ablation::no_verification: return LayerKind::self_verification;
    }
    return LayerKind::identity;
}

struct PromptLayer {
    LayerKind kind = LayerKind::identity;
    std::string text;
    size_t token_budget = 0;  // soft target, recorded not enforced
    size_t token_actual = 0;
};

struct LayeredPrompt {
    std::vector<PromptLayer> layers;  // ordered
    PromptVersion version = PromptVersion::v1;
    std::set<Ablation> ablations;
    size_t total_tokens = 0;
    std::string content_hash;

    std::string text() const {
        std::string out;
        for (size_t i = 0; i < layers.size(); ++i) {
            if (i) out += "\n\n";
            out += layers[i].text;
        }
        return out;
    }

    bool has_layer(LayerKind k) const {
        for (const auto& l : layers)
            if (l.kind == k) return true;
        return false;
    }

    const PromptLayer* layer(LayerKind k) const {
        for (const auto& l : layers)
            if (l.kind == k) return &l;
        return nullptr;
    }
};

// Soft token budgets per layer.
inline std::map<LayerKind, size_t> default_layer_budgets() {
    return {{LayerKind::identity, 200},
            {LayerKind::negative_constraints, 600},
            {LayerKind::grammar_rules, 1200},
            {LayerKind::few_shot_examples, 600},
            {LayerKind::self_verification, 200}};
}

struct CompileConfig {
    PromptVersion version = PromptVersion::v4;
    std::set<Ablation> ablations;
    std::optional<std::vector<LayerKind>> layer_order;  // default: constraints early
    size_t example_count = 10;
    const TokenCounter* counter = nullptr;  // whitespace counter when unset
    bool corrupted_grammar = false;
    uint64_t corruption_seed = 1;
    bool emphasis = true;  // "CRITICAL"/"NEVER" markers in the constraint layer
    std::map<LayerKind, size_t> budgets = default_layer_budgets();
};

// ---------------------------------------------------------------------------
// Layer renderers

inline std::string render_identity_layer(const LanguagePack& pack) {
    std::ostringstream out;
    out << "You are a fluent native speaker of " << pack.target_language_name << ".\n"
        << "Respond in " << pack.target_language_name
        << " using the standardized romanization (diacritics for retroflex consonants and "
           "long vowels).\n"
        << "Answer naturally and concisely, as in everyday conversation.";
    return out.str();
}

inline std::string render_constraints_layer(const LanguagePack& pack, bool emphasis) {
    std::ostringstream out;
    if (emphasis) {
        out << "*** CRITICAL: NEVER use these " << pack.contaminant_language_name
            << " words. ALWAYS use the " << pack.target_language_name << " alternatives. ***\n";
    } else {
        out << "Do not use these " << pack.contaminant_language_name << " words; use the "
            << pack.target_language_name << " alternatives.\n";
    }
    for (const auto& pair : pack.watchlist.pairs) {
        out << "  " << pair.prohibited << " → " << pair.replacement;
        if (!pair.gloss.empty()) out << " (" << pair.gloss << ")";
        out << "\n";
    }
    if (!pack.watchlist.loanword_allowlist.empty()) {
        out << "Established loanwords for modern concepts are acceptable:";
        for (size_t i = 0; i < pack.watchlist.loanword_allowlist.size(); ++i)
            out << (i ? ", " : " ") << pack.watchlist.loanword_allowlist[i];
        out << ".\n";
    }
    if (emphasis) out << "These constraints are NON-NEGOTIABLE.";
    return out.str();
}

inline std::string render_grammar_layer(const LanguagePack& pack, const GrammarRulePack& grammar) {
    std::ostringstream out;
    out << pack.target_language_name << " grammar rules:\n";
    out << "Word order: subject-object-verb (SOV). Postpositions follow the noun; "
           "adjectives precede it.\n";
    if (!grammar.pronouns.empty()) {
        out << "Pronouns:\n";
        for (const auto& [key, forms] : grammar.pronouns) {
            out << "  person " << key.person << " " << to_string(key.number) << " "
                << to_string(key.formality) << ":";
            for (const auto& form : forms) out << " " << form;
            out << "\n";
        }
    }
    if (!grammar.verb_paradigms.empty()) {
        out << "Verb paradigms:\n";
        for (const auto& [lemma, paradigm] : grammar.verb_paradigms) {
            out << "  " << lemma << ":\n";
            for (const auto& form : paradigm.forms) {
                out << "    " << form.surface << " — " << form.person << " "
                    << to_string(form.number) << " " << to_string(form.tense);
                if (form.gender != Gender::none) out << " " << to_string(form.gender);
                if (form.formality == Formality::formal) out << " formal";
                out << "\n";
            }
        }
    }
    if (!grammar.case_markers.empty()) {
        out << "Case markers:\n";
        for (const auto& [c, marker] : grammar.case_markers) {
            out << "  " << to_string(c) << ":";
            for (const auto& s : marker.suffixes) {
                out << " -" << s.suffix;
                if (s.stem_class != "any") out << " (" << s.stem_class << " stems)";
            }
            out << "\n";
        }
    }
    return out.str();
}

inline std::string render_examples_layer(const LanguagePack& pack, size_t count) {
    std::ostringstream out;
    out << "Examples of natural " << pack.target_language_name << " usage:\n";
    size_t n = std::min(count, pack.seed_examples.size());
    for (size_t i = 0; i < n; ++i) {
        out << "Q: " << pack.seed_examples[i].question << "\n"
            << "A: " << pack.seed_examples[i].answer << "\n";
    }
    return out.str();
}

// Numbered checklist from the pack's verification items.
inline std::string render_verification_layer(const LanguagePack& pack) {
    if (pack.verification_checklist.empty())
        throw Error("render_verification_layer: pack has an empty verification checklist");
    std::ostringstream out;
    out << "Before responding, verify:\n";
    for (size_t i = 0; i < pack.verification_checklist.size(); ++i)
        out << "(" << (i + 1) << ") " << pack.verification_checklist[i] << "\n";
    out << "Only respond once every check passes.";
    return out.str();
}

// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<LayerKind> layers_for_version(PromptVersion v) {
    switch (v) {
        case PromptVersion::v1:
            return {LayerKind::identity};
        case PromptVersion::v2:
            return {LayerKind::identity, LayerKind::grammar_rules};
        case PromptVersion::v3:
            return {LayerKind::identity, LayerKind::negative_constraints, LayerKind::grammar_rules};
        case PromptVersion::v4:
            return {LayerKind::identity, LayerKind::negative_constraints, LayerKind::grammar_rules,
                    LayerKind::few_shot_examples, LayerKind::self_verification};
    }
    return {LayerKind::identity};
}

inline std::string prompt_digest(PromptVersion version, const std::vector<PromptLayer>& layers) {
    uint64_t h = fnv1a(to_string(version));
    for (const auto& layer : layers) {
        h = fnv1a(to_string(layer.kind), h);
        h = fnv1a("\x1f", h);
        h = fnv1a(layer.text, h);
        h = fnv1a("\x1e", h);
    }
    return to_hex(h);
}

}  // namespace detail

inline LayeredPrompt compile_prompt(const LanguagePack& pack, const CompileConfig& cfg) {
    // Ablations are defined against the full system; earlier versions are
    // themselves the ablation ladder.
    if (!cfg.ablations.empty() && cfg.version != PromptVersion::v4) {
        throw Error("ablation " + to_string(*cfg.ablations.begin()) +
                    " removes a layer required by version " + to_string(cfg.version));
    }
    std::vector<LayerKind> kinds = detail::layers_for_version(cfg.version);
    for (Ablation a : cfg.ablations)
        std::erase(kinds, ablated_kind(a));

    std::vector<LayerKind> order;
    if (cfg.layer_order) {
        order = *cfg.layer_order;
        std::vector<LayerKind> sorted_order = order, sorted_kinds = kinds;
        auto by_value = [](LayerKind a, LayerKind b) {
            return static_cast<int>(a) < static_cast<int>(b);
        };
        std::sort(sorted_order.begin(), sorted_order.end(), by_value);
        std::sort(sorted_kinds.begin(), sorted_kinds.end(), by_value);
        if (sorted_order != sorted_kinds)
            throw Error("layer_order must contain each included layer kind exactly once");
    } else {
        for (LayerKind k : kDefaultLayerOrder)
            if (std::find(kinds.begin(), kinds.end(), k) != kinds.end()) order.push_back(k);
    }

    static const WhitespaceCounter fallback_counter;
    const TokenCounter& counter = cfg.counter ? *cfg.counter : fallback_counter;

    LayeredPrompt prompt;
    prompt.version = cfg.version;
    prompt.ablations = cfg.ablations;
    for (LayerKind k : order) {
        PromptLayer layer;
        layer.kind = k;
        switch (k) {
            case LayerKind::identity:
                layer.text = render_identity_layer(pack);
                break;
            case LayerKind::negative_constraints:
                layer.text = render_constraints_layer(pack, cfg.emphasis);
                break;
            case LayerKind::grammar_rules:
                layer.text = render_grammar_layer(
                    pack, cfg.corrupted_grammar ? corrupt_grammar(pack.grammar, cfg.corruption_seed)
                                                : pack.grammar);
                break;
            case LayerKind::few_shot_examples:
                layer.text = render_examples_layer(pack, cfg.example_count);
                break;
            case LayerKind::self_verification:
                layer.text = render_verification_layer(pack);
                break;
        }
        if (auto it = cfg.budgets.find(k); it != cfg.budgets.end()) layer.token_budget = it->second;
        layer.token_actual = counter.count(layer.text);
        prompt.total_tokens += layer.token_actual;
        prompt.layers.push_back(std::move(layer));
    }
    prompt.content_hash = detail::prompt_digest(prompt.version, prompt.layers);
    return prompt;
}

// Same layer contents in a new order; the content hash is recomputed.
inline LayeredPrompt permute_layers(const LayeredPrompt& prompt,
                                    const std::vector<LayerKind>& order) {
    std::vector<LayerKind> present;
    for (const auto& l : prompt.layers) present.push_back(l.kind);
    std::vector<LayerKind> sorted_order = order, sorted_present = present;
    auto by_value = [](LayerKind a, LayerKind b) { return static_cast<int>(a) < static_cast<int>(b); };
    std::sort(sorted_order.begin(), sorted_order.end(), by_value);
    std::sort(sorted_present.begin(), sorted_present.end(), by_value);
    if (sorted_order != sorted_present)
        throw Error("permutation must cover exactly the present layer kinds");

    LayeredPrompt out = prompt;
    out.layers.clear();
    for (LayerKind k : order) out.layers.push_back(*prompt.layer(k));
    out.content_hash = detail::prompt_digest(out.version, out.layers);
    return out;
}

// n seeded layer orderings, reproducible across runs and platforms.
inline std::vector<std::vector<LayerKind>> seeded_layer_orders(const LayeredPrompt& prompt,
                                                               size_t n, uint64_t seed) {
    std::vector<LayerKind> kinds;
    for (const auto& l : prompt.layers) kinds.push_back(l.kind);
    SplitMix64 rng(seed);
    std::vector<std::vector<LayerKind>> orders;
    for (size_t i = 0; i < n; ++i) {
        std::vector<LayerKind> order = kinds;
        rng.shuffle(order);
        orders.push_back(std::move(order));
    }
    return orders;
}

inline nlohmann::json prompt_to_json(const LayeredPrompt& prompt) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : prompt.layers)
        layers.push_back({{"kind", to_string(l.kind)},
                          {"text", l.text},
                          {"token_budget", l.token_budget},
                          {"token_actual", l.token_actual}});
    nlohmann::json ablations = nlohmann::json::array();
    for (Ablation a : prompt.ablations) ablations.push_back(to_string(a));
    return {{"version", to_string(prompt.version)},
            {"ablations", ablations},
            {"layers", layers},
            {"total_tokens", prompt.total_tokens},
            {"content_hash", prompt.content_hash}};
}

}  // namespace tulu
