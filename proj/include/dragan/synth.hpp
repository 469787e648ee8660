#pragma once

#include <algorithm>
#include <cctype>
#include <string>
#include <unordered_set>
#include <vector>

#include "dragan/data.hpp"
#include "dragan/errors.hpp"
#include "dragan/rng.hpp"

namespace dragan {

// Synthetic e-commerce corpus. Titles follow the template
//   brand ' ' product-word ' ' attribute(s) ' ' model-code
// and a configurable fraction of queries are opaque model codes like
// "bq-731x" whose category is recoverable only via the paired title.
//
// Code structure: 2-letter prefix '-' 3 digits + 1 letter. Each prefix maps
// to exactly one category; single letters are reused across categories so a
// bag-of-characters model gets nothing from them. Per category, a
// long_tail_fraction of prefixes is held out of the joint-training split:
// those prefixes occur with titles in the pre-training split, and the
// long-tail eval consists of fresh codes carrying them.
struct CorpusSpec {
    int num_categories = 20;
    int num_brands = 24;
    int num_model_codes = 1200;  // size of the training item catalog
    int num_attributes = 30;
    int prefixes_per_category = 4;
    int title_len_min = 18;
    int title_len_max = 40;
    double long_tail_fraction = 0.5;  // fraction of each category's prefixes held out
    double opaque_fraction = 0.5;     // fraction of queries that are bare model codes
    int pretrain_examples = 4000;
    int joint_examples = 2000;
    int eval_overall_examples = 400;
    int eval_longtail_examples = 400;
    std::uint64_t seed = 1;
};

struct CatalogItem {
    int category = -1;
    std::string brand, product, attrs, code;

    std::string title() const { return brand + " " + product + " " + attrs + " " + code; }
};

struct SynthCorpus {
    CorpusSpec spec;
    std::vector<std::string> category_names;
    std::vector<std::vector<std::string>> product_words;  // per category
    std::vector<std::vector<std::string>> prefixes;       // per category, trained first
    std::vector<int> heldout_prefix_count;                // per category
    int product_band_lo = 0, product_band_hi = 0;         // start positions of product words

    std::vector<RawExample> pretrain, joint, eval_overall, eval_longtail;

    // category of a product word, -1 if none
    int category_of_word(const std::string& w) const {
        for (int c = 0; c < static_cast<int>(product_words.size()); ++c)
            for (const auto& pw : product_words[c])
                if (pw == w) return c;
        return -1;
    }
};

// "bq-731x" shape: two letters, hyphen, three digits, one letter
inline bool is_opaque_code_query(const std::string& q) {
    if (q.size() != 7) return false;
    auto lower = [](char c) { return std::islower(static_cast<unsigned char>(c)); };
    auto digit = [](char c) { return std::isdigit(static_cast<unsigned char>(c)); };
    return lower(q[0]) && lower(q[1]) && q[2] == '-' && digit(q[3]) && digit(q[4]) && digit(q[5]) &&
           lower(q[6]);
}

namespace detail {

inline std::string random_word(Rng& rng, int len_min, int len_max) {
    const int len = rng.range_int(len_min, len_max);
    std::string w;
    for (int i = 0; i < len; ++i) w += static_cast<char>('a' + rng.below(26));
    return w;
}

inline std::string fresh_word(Rng& rng, int len_min, int len_max, std::unordered_set<std::string>& used) {
    for (int tries = 0; tries < 100000; ++tries) {
        std::string w = random_word(rng, len_min, len_max);
        if (used.insert(w).second) return w;
    }
    throw ConfigError("synth: word space exhausted");
}

}  // namespace detail

inline SynthCorpus synth_corpus(const CorpusSpec& spec) {
    if (spec.num_categories < 1 || spec.num_brands < 1 || spec.num_model_codes < 1 ||
        spec.num_attributes < 1 || spec.prefixes_per_category < 1)
        throw ConfigError("synth: all counts must be >= 1");
    if (spec.long_tail_fraction < 0.0 || spec.long_tail_fraction > 1.0)
        throw ConfigError("synth: long_tail_fraction must be in [0,1]");
    if (spec.opaque_fraction < 0.0 || spec.opaque_fraction > 1.0)
        throw ConfigError("synth: opaque_fraction must be in [0,1]");
    const long long prefix_demand =
        static_cast<long long>(spec.num_categories) * spec.prefixes_per_category;
    if (prefix_demand > 26 * 26)
        throw ConfigError("synth: prefix space exhausted (need " + std::to_string(prefix_demand) +
                          " of 676 two-letter prefixes)");
    // each prefix offers 1000 * 26 distinct codes
    const long long code_space = prefix_demand * 26000LL;
    const long long code_demand = static_cast<long long>(spec.num_model_codes) +
                                  spec.eval_overall_examples + spec.eval_longtail_examples;
    if (code_demand > code_space)
        throw ConfigError("synth: more unique codes demanded than code space (" +
                          std::to_string(code_demand) + " > " + std::to_string(code_space) + ")");

    SynthCorpus out;
    out.spec = spec;
    Rng rng(spec.seed);

    const int C = spec.num_categories;
    for (int c = 0; c < C; ++c) {
        std::string name = "cat";
        if (c < 10) name += "0";
        out.category_names.push_back(name + std::to_string(c));
    }

    // word inventories, all pairwise distinct
    std::unordered_set<std::string> used;
    std::vector<std::string> brands, attrs;
    int brand_len_min = 99, brand_len_max = 0;
    for (int b = 0; b < spec.num_brands; ++b) {
        brands.push_back(detail::fresh_word(rng, 3, 5, used));
        brand_len_min = std::min(brand_len_min, static_cast<int>(brands.back().size()));
        brand_len_max = std::max(brand_len_max, static_cast<int>(brands.back().size()));
    }
    out.product_band_lo = brand_len_min + 1;
    out.product_band_hi = brand_len_max + 1;
    out.product_words.resize(C);
    for (int c = 0; c < C; ++c)
        for (int k = 0; k < 2; ++k) out.product_words[c].push_back(detail::fresh_word(rng, 5, 7, used));
    for (int a = 0; a < spec.num_attributes; ++a) attrs.push_back(detail::fresh_word(rng, 3, 6, used));

    // category-indicative code prefixes; trained ones first, held-out after
    std::unordered_set<std::string> used_prefixes;
    out.prefixes.resize(C);
    out.heldout_prefix_count.resize(C);
    for (int c = 0; c < C; ++c) {
        for (int p = 0; p < spec.prefixes_per_category; ++p) {
            for (int tries = 0;; ++tries) {
                if (tries > 100000) throw ConfigError("synth: prefix sampling exhausted");
                std::string pre;
                pre += static_cast<char>('a' + rng.below(26));
                pre += static_cast<char>('a' + rng.below(26));
                if (used_prefixes.insert(pre).second) {
                    out.prefixes[c].push_back(pre);
                    break;
                }
            }
        }
        int held = static_cast<int>(std::llround(spec.prefixes_per_category * spec.long_tail_fraction));
        held = std::min(held, spec.prefixes_per_category - 1);  // keep at least one trained prefix
        out.heldout_prefix_count[c] = held;
    }
    auto trained_prefix_count = [&](int c) {
        return spec.prefixes_per_category - out.heldout_prefix_count[c];
    };

    std::unordered_set<std::string> used_codes;
    auto fresh_code = [&](const std::string& prefix) {
        for (int tries = 0;; ++tries) {
            if (tries > 200000) throw ConfigError("synth: code sampling exhausted");
            std::string code = prefix + "-";
            for (int d = 0; d < 3; ++d) code += static_cast<char>('0' + rng.below(10));
            code += static_cast<char>('a' + rng.below(26));
            if (used_codes.insert(code).second) return code;
        }
    };

    auto make_item = [&](int category, const std::string& prefix) {
        CatalogItem it;
        it.category = category;
        it.code = fresh_code(prefix);
        it.brand = brands[rng.below(brands.size())];
        it.product = out.product_words[category][rng.below(2)];
        for (int tries = 0;; ++tries) {
            if (tries > 1000)
                throw ConfigError("synth: cannot satisfy title length range [" +
                                  std::to_string(spec.title_len_min) + "," +
                                  std::to_string(spec.title_len_max) + "]");
            const int n_attr = rng.range_int(1, 2);
            std::string a = attrs[rng.below(attrs.size())];
            if (n_attr == 2) a += " " + attrs[rng.below(attrs.size())];
            it.attrs = a;
            const int len = static_cast<int>(it.title().size());
            if (len >= spec.title_len_min && len <= spec.title_len_max) break;
        }
        return it;
    };

    // training catalog; round-robin over categories and their prefixes so
    // trained and held-out prefixes are both well represented
    std::vector<CatalogItem> catalog;
    std::vector<std::vector<int>> items_of_cat(C), trained_items_of_cat(C);
    for (int i = 0; i < spec.num_model_codes; ++i) {
        const int c = i % C;
        const int pidx = (i / C) % spec.prefixes_per_category;
        catalog.push_back(make_item(c, out.prefixes[c][pidx]));
        items_of_cat[c].push_back(i);
        if (pidx < trained_prefix_count(c)) trained_items_of_cat[c].push_back(i);
    }
    for (int c = 0; c < C; ++c)
        if (trained_items_of_cat[c].empty())
            throw ConfigError("synth: category without trained-prefix items; raise num_model_codes");

    auto transparent_query = [&](const CatalogItem& it) {
        const double r = rng.uniform();
        if (r < 0.60) return it.product;
        if (r < 0.85) return it.brand + " " + it.product;
        // first attribute word only, to respect the query length cap
        const auto sp = it.attrs.find(' ');
        return it.product + " " + (sp == std::string::npos ? it.attrs : it.attrs.substr(0, sp));
    };

    auto example_from_item = [&](const CatalogItem& it, bool opaque) {
        RawExample e;
        e.query = opaque ? it.code : transparent_query(it);
        e.title = it.title();
        e.category = out.category_names[it.category];
        return e;
    };

    auto sample_categories = [&](int n) {
        // iid uniform, then patch in any missing category at random slots so
        // every category appears
        std::vector<int> cats(n);
        for (int i = 0; i < n; ++i) cats[i] = static_cast<int>(rng.below(C));
        if (n >= C) {
            std::vector<int> count(C, 0);
            for (int c : cats) ++count[c];
            for (int c = 0; c < C; ++c) {
                while (count[c] == 0) {
                    const int slot = static_cast<int>(rng.below(n));
                    if (count[cats[slot]] <= 1) continue;
                    --count[cats[slot]];
                    cats[slot] = c;
                    ++count[c];
                }
            }
        }
        return cats;
    };

    // pre-training split: all prefixes occur as opaque queries with titles
    for (int c : sample_categories(spec.pretrain_examples)) {
        const bool opaque = rng.uniform() < spec.opaque_fraction;
        const auto& pool = items_of_cat[c];
        const CatalogItem& it = catalog[pool[rng.below(pool.size())]];
        out.pretrain.push_back(example_from_item(it, opaque));
    }

    // joint split: opaque queries restricted to trained prefixes
    for (int c : sample_categories(spec.joint_examples)) {
        const bool opaque = rng.uniform() < spec.opaque_fraction;
        const auto& pool = opaque ? trained_items_of_cat[c] : items_of_cat[c];
        const CatalogItem& it = catalog[pool[rng.below(pool.size())]];
        out.joint.push_back(example_from_item(it, opaque));
    }

    // overall eval: same mixture, but fresh items (codes unseen in training)
    for (int c : sample_categories(spec.eval_overall_examples)) {
        const bool opaque = rng.uniform() < spec.opaque_fraction;
        if (opaque) {
            const int pidx = static_cast<int>(rng.below(static_cast<std::uint64_t>(trained_prefix_count(c))));
            out.eval_overall.push_back(example_from_item(make_item(c, out.prefixes[c][pidx]), true));
        } else {
            const auto& pool = items_of_cat[c];
            out.eval_overall.push_back(example_from_item(catalog[pool[rng.below(pool.size())]], false));
        }
    }

    // long-tail eval: all-opaque fresh codes with held-out prefixes; empty
    // when nothing is held out (the held-out count is uniform across
    // categories, so any category having one means all do)
    if (out.heldout_prefix_count[0] > 0) {
        for (int c : sample_categories(spec.eval_longtail_examples)) {
            const int held = out.heldout_prefix_count[c];
            const int pidx = trained_prefix_count(c) + static_cast<int>(rng.below(held));
            out.eval_longtail.push_back(example_from_item(make_item(c, out.prefixes[c][pidx]), true));
        }
    }

    return out;
}

}  // namespace dragan
