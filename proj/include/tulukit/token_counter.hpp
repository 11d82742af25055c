#pragma once

// Pluggable token counting. Tokenization efficiency is measured against a
// model tokenizer in principle; offline we provide a bundled greedy
// longest-match subword counter over a vocabulary file, a replay counter fed
// from recorded external counts, and a plain whitespace counter.

#include <algorithm>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tulukit/errors.hpp"
#include "tulukit/hash.hpp"
#include "tulukit/unicode.hpp"

#include "json.hpp"

namespace tulu {

struct TokenCounter {
    virtual ~TokenCounter() = default;
    virtual const std::string& name() const = 0;
    // Deterministic; count("") must be 0.
    virtual size_t count(std::string_view text) const = 0;
};

// One token per whitespace-delimited word.
class WhitespaceCounter final : public TokenCounter {
public:
    const std::string& name() const override {
        static const std::string n = "whitespace";
        return n;
    }
    size_t count(std::string_view text) const override {
        size_t words = 0;
        bool in_word = false;
        for (char c : text) {
            bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r';
            if (!ws && !in_word) ++words;
            in_word = !ws;
        }
        return words;
    }
};

// Greedy longest-match subword segmentation over a fixed vocabulary, applied
// per whitespace-delimited word. A codepoint with no matching subword counts
// as one unknown token and the scan advances past it.
class GreedySubwordCounter final : public TokenCounter {
public:
    GreedySubwordCounter(std::string name, std::vector<std::string> vocabulary)
        : name_(std::move(name)) {
        for (auto& piece : vocabulary) {
            std::u32string cps = uni::decode_utf8(piece);
            if (cps.empty()) continue;
            max_len_ = std::max(max_len_, cps.size());
            vocab_.insert(std::move(cps));
        }
    }

    static GreedySubwordCounter from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open vocabulary file: " + path);
        std::vector<std::string> vocab;
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty() && line[0] != '#') vocab.push_back(line);
        }
        return GreedySubwordCounter("greedy:" + path, std::move(vocab));
    }

    const std::string& name() const override { return name_; }

    size_t count(std::string_view text) const override {
        size_t total = 0;
        std::istringstream words{std::string(text)};
        std::string word;
        while (words >> word) total += count_word(uni::decode_utf8(word));
        return total;
    }

    size_t max_subword_length() const { return max_len_; }

private:
    size_t count_word(const std::u32string& cps) const {
        size_t tokens = 0;
        size_t pos = 0;
        while (pos < cps.size()) {
            size_t len = std::min(max_len_, cps.size() - pos);
            bool matched = false;
            for (; len >= 1; --len) {
                if (vocab_.count(cps.substr(pos, len))) {
                    matched = true;
                    break;
                }
            }
            ++tokens;
            pos += matched ? len : 1;
        }
        return tokens;
    }

    struct U32Hash {
        size_t operator()(const std::u32string& s) const {
            uint64_t h = kFnvOffset;
            for (char32_t c : s) {
                h ^= static_cast<uint64_t>(c);
                h *= kFnvPrime;
            }
            return static_cast<size_t>(h);
        }
    };

    std::string name_;
    std::unordered_set<std::u32string, U32Hash> vocab_;
    size_t max_len_ = 0;
};

// Replays recorded counts from an external tokenizer. The store maps the
// FNV-1a hash of the exact text to its token count.
class ReplayTokenCounter final : public TokenCounter {
public:
    explicit ReplayTokenCounter(std::unordered_map<std::string, size_t> counts,
                                std::string name = "replay")
        : name_(std::move(name)), counts_(std::move(counts)) {}

    static ReplayTokenCounter from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open token count fixture: " + path);
        nlohmann::json doc;
        try {
            in >> doc;
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("token count fixture " + path + ": " + e.what());
        }
        std::unordered_map<std::string, size_t> counts;
        for (auto it = doc.begin(); it != doc.end(); ++it)
            counts[it.key()] = it.value().get<size_t>();
        return ReplayTokenCounter(std::move(counts), "replay:" + path);
    }

    static std::string key_for(std::string_view text) { return content_hash(text); }

    const std::string& name() const override { return name_; }

    size_t count(std::string_view text) const override {
        if (text.empty()) return 0;
        auto it = counts_.find(key_for(text));
        if (it == counts_.end())
            throw Error("no recorded token count for text hash " + key_for(text));
        return it->second;
    }

    void record(std::string_view text, size_t n) { counts_[key_for(text)] = n; }

private:
    std::string name_;
    std::unordered_map<std::string, size_t> counts_;
};

}  // namespace tulu
