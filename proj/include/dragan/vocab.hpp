#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "dragan/errors.hpp"

namespace dragan {

using TokenSeq = std::vector<int>;

// Character-level vocabulary. Specials occupy fixed reserved ids; character
// tokens follow in byte order so construction is deterministic.
class Vocab {
public:
    static constexpr int kPad = 0;
    static constexpr int kBos = 1;
    static constexpr int kEos = 2;
    static constexpr int kSep = 3;
    static constexpr int kCls = 4;
    static constexpr int kUnk = 5;
    static constexpr int kNumSpecials = 6;

    static Vocab build(const std::vector<std::string>& corpus) {
        if (corpus.empty()) throw ContractError("build_vocab: empty corpus");
        std::set<char> chars;
        for (const auto& text : corpus)
            for (char c : text) chars.insert(c);
        Vocab v;
        for (char c : chars) {
            v.char_to_id_[c] = static_cast<int>(v.tokens_.size());
            v.tokens_.push_back(std::string(1, c));
        }
        return v;
    }

    int size() const { return kNumSpecials + static_cast<int>(tokens_.size()); }

    TokenSeq encode(const std::string& text) const {
        TokenSeq ids;
        ids.reserve(text.size());
        for (char c : text) {
            auto it = char_to_id_.find(c);
            ids.push_back(it == char_to_id_.end() ? kUnk : kNumSpecials + it->second);
        }
        return ids;
    }

    std::string decode(const TokenSeq& ids) const {
        static const char* kSpecialNames[kNumSpecials] = {"<pad>", "<bos>", "<eos>",
                                                          "<sep>", "<cls>", "<unk>"};
        std::string out;
        for (int id : ids) {
            if (id < 0 || id >= size()) throw ContractError("decode: id out of range");
            if (id < kNumSpecials)
                out += kSpecialNames[id];
            else
                out += tokens_[id - kNumSpecials];
        }
        return out;
    }

    const std::vector<std::string>& char_tokens() const { return tokens_; }

    // serialization: character tokens only, one per line by id order
    std::string to_blob() const {
        std::string s;
        for (const auto& t : tokens_) s += t + "\n";
        return s;
    }

    static Vocab from_blob(const std::string& blob) {
        Vocab v;
        std::string cur;
        for (char c : blob) {
            if (c == '\n') {
                if (cur.size() != 1) throw DataError("vocab blob: bad token");
                v.char_to_id_[cur[0]] = static_cast<int>(v.tokens_.size());
                v.tokens_.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        return v;
    }

private:
    std::vector<std::string> tokens_;  // character tokens, id = kNumSpecials + index
    std::unordered_map<char, int> char_to_id_;
};

}  // namespace dragan
