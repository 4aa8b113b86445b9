#pragma once

// Tree-ensemble classifiers for the location and dwell-bin heads.
//
// One randomized-decision-tree family with two split modes: random
// thresholds (fast, extra-trees style) and exact gini-optimal thresholds
// (random-forest style, used with bootstrap). Votes are integers and all
// argmax ties resolve to the lowest class id, so predictions are exactly
// reproducible for a given seed on any thread count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mobsim/features.hpp"
#include "mobsim/parallel.hpp"
#include "mobsim/rng.hpp"

namespace mobsim {

struct EnsembleSpec {
    std::int32_t n_trees = 100;
    std::int32_t max_depth = 16;
    std::int32_t min_samples_split = 2;
    std::int32_t min_samples_leaf = 1;
    std::int32_t mtry = 0;  // 0 = round(sqrt(n_features))
    bool bootstrap = false;
    bool exact_thresholds = false;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_trees < 1) throw std::invalid_argument("n_trees must be >= 1");
        if (max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
        if (min_samples_split < 2)
            throw std::invalid_argument("min_samples_split must be >= 2");
        if (min_samples_leaf < 1)
            throw std::invalid_argument("min_samples_leaf must be >= 1");
        if (mtry < 0) throw std::invalid_argument("mtry must be >= 0");
    }

    std::int32_t effective_mtry(std::size_t n_features) const {
        if (mtry > 0) return std::min<std::int32_t>(mtry, static_cast<std::int32_t>(n_features));
        return std::max<std::int32_t>(
            1, static_cast<std::int32_t>(std::lround(std::sqrt(static_cast<double>(n_features)))));
    }
};

// Maps arbitrary integer labels to contiguous class indices, sorted
// ascending so index order equals label order.
struct ClassMap {
    std::vector<std::int32_t> classes;

    static ClassMap from_labels(const std::vector<std::int32_t>& labels) {
        ClassMap map;
        map.classes = labels;
        std::sort(map.classes.begin(), map.classes.end());
        map.classes.erase(std::unique(map.classes.begin(), map.classes.end()),
                          map.classes.end());
        if (map.classes.empty()) throw std::invalid_argument("no labels to map");
        return map;
    }

    std::int32_t index_of(std::int32_t label) const {
        const auto it = std::lower_bound(classes.begin(), classes.end(), label);
        if (it == classes.end() || *it != label) return -1;
        return static_cast<std::int32_t>(it - classes.begin());
    }

    std::int32_t label_of(std::int32_t index) const {
        return classes[static_cast<std::size_t>(index)];
    }

    std::size_t size() const { return classes.size(); }
};

struct TreeNode {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::int32_t left = -1;  // right child is left + 1
    std::int32_t label = -1; // class index at leaves
};

struct Tree {
    std::vector<TreeNode> nodes;

    std::int32_t predict(const double* row) const {
        std::size_t at = 0;
        while (nodes[at].feature >= 0) {
            const TreeNode& n = nodes[at];
            at = static_cast<std::size_t>(
                row[n.feature] < n.threshold ? n.left : n.left + 1);
        }
        return nodes[at].label;
    }
};

namespace detail {

class TreeBuilder {
public:
    TreeBuilder(const FeatureMatrix& X, const std::vector<std::int32_t>& y,
                std::size_t n_classes, const EnsembleSpec& spec, Rng rng)
        : X_(X), y_(y), n_classes_(n_classes), spec_(spec), rng_(rng) {
        mtry_ = static_cast<std::size_t>(spec_.effective_mtry(X_.n_cols));
        feat_order_.resize(X_.n_cols);
        for (std::size_t f = 0; f < X_.n_cols; ++f)
            feat_order_[f] = static_cast<std::int32_t>(f);
    }

    // Breadth-first growth: when a node splits, both child slots are
    // reserved together so the right child is always left + 1.
    Tree build() {
        idx_.clear();
        idx_.reserve(X_.n_rows);
        if (spec_.bootstrap) {
            for (std::size_t i = 0; i < X_.n_rows; ++i)
                idx_.push_back(static_cast<std::int32_t>(rng_.below(X_.n_rows)));
        } else {
            for (std::size_t i = 0; i < X_.n_rows; ++i)
                idx_.push_back(static_cast<std::int32_t>(i));
        }
        Tree tree;
        nodes_ = &tree.nodes;
        struct Item {
            std::size_t begin;
            std::size_t end;
            std::int32_t depth;
            std::int32_t slot;
        };
        std::vector<Item> queue;
        nodes_->emplace_back();
        queue.push_back({0, idx_.size(), 0, 0});
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            const Item item = queue[qi];
            const std::size_t n = item.end - item.begin;
            if (item.depth >= spec_.max_depth ||
                n < static_cast<std::size_t>(spec_.min_samples_split) ||
                is_pure(item.begin, item.end)) {
                fill_leaf(item.slot, item.begin, item.end);
                continue;
            }
            const Split best = pick_split(item.begin, item.end);
            if (best.feature < 0) {
                fill_leaf(item.slot, item.begin, item.end);
                continue;
            }
            const auto mid_it = std::partition(
                idx_.begin() + static_cast<std::ptrdiff_t>(item.begin),
                idx_.begin() + static_cast<std::ptrdiff_t>(item.end), [&](std::int32_t r) {
                    return X_.at(static_cast<std::size_t>(r),
                                 static_cast<std::size_t>(best.feature)) < best.threshold;
                });
            const auto mid = static_cast<std::size_t>(mid_it - idx_.begin());
            if (mid == item.begin || mid == item.end) {
                fill_leaf(item.slot, item.begin, item.end);
                continue;
            }
            const auto left = static_cast<std::int32_t>(nodes_->size());
            nodes_->emplace_back();
            nodes_->emplace_back();
            TreeNode& parent = (*nodes_)[static_cast<std::size_t>(item.slot)];
            parent.feature = best.feature;
            parent.threshold = best.threshold;
            parent.left = left;
            queue.push_back({item.begin, mid, item.depth + 1, left});
            queue.push_back({mid, item.end, item.depth + 1, left + 1});
        }
        return tree;
    }

private:
    struct Split {
        std::int32_t feature = -1;
        double threshold = 0.0;
        double score = std::numeric_limits<double>::infinity();
    };

    // Sum over children of n_child - sum_c(count_c^2)/n_child; lower is purer.
    static double side_score(const std::vector<std::int64_t>& counts, double n) {
        double ssq = 0.0;
        for (const std::int64_t c : counts) ssq += static_cast<double>(c) * static_cast<double>(c);
        return n - ssq / n;
    }

    void fill_leaf(std::int32_t slot, std::size_t begin, std::size_t end) {
        counts_buf_.assign(n_classes_, 0);
        for (std::size_t i = begin; i < end; ++i)
            ++counts_buf_[static_cast<std::size_t>(y_[static_cast<std::size_t>(idx_[i])])];
        std::int32_t best = 0;
        for (std::size_t c = 1; c < counts_buf_.size(); ++c)
            if (counts_buf_[c] > counts_buf_[static_cast<std::size_t>(best)])
                best = static_cast<std::int32_t>(c);
        TreeNode& leaf = (*nodes_)[static_cast<std::size_t>(slot)];
        leaf.feature = -1;
        leaf.label = best;
    }

    // Draws features without replacement until mtry non-constant ones have
    // been scored; columns that are constant within the node do not consume
    // a slot, so nodes dominated by dead columns still find real splits.
    Split pick_split(std::size_t begin, std::size_t end) {
        Split best;
        std::size_t scored = 0;
        for (std::size_t j = 0; j < feat_order_.size() && scored < mtry_; ++j) {
            const std::size_t pick =
                j + static_cast<std::size_t>(rng_.below(feat_order_.size() - j));
            std::swap(feat_order_[j], feat_order_[pick]);
            bool constant = false;
            const Split s = spec_.exact_thresholds
                                ? try_exact(feat_order_[j], begin, end, constant)
                                : try_random(feat_order_[j], begin, end, constant);
            if (constant) continue;
            ++scored;
            if (s.feature >= 0 && s.score < best.score) best = s;
        }
        return best;
    }

    bool is_pure(std::size_t begin, std::size_t end) const {
        const std::int32_t first = y_[static_cast<std::size_t>(idx_[begin])];
        for (std::size_t i = begin + 1; i < end; ++i)
            if (y_[static_cast<std::size_t>(idx_[i])] != first) return false;
        return true;
    }

    Split try_random(std::int32_t f, std::size_t begin, std::size_t end, bool& constant) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t i = begin; i < end; ++i) {
            const double v = X_.at(static_cast<std::size_t>(idx_[i]), static_cast<std::size_t>(f));
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        Split s;
        if (!(hi > lo)) {
            constant = true;
            return s;
        }
        double theta = lo + rng_.uniform() * (hi - lo);
        if (!(theta > lo)) theta = lo + (hi - lo) * 0.5;
        left_buf_.assign(n_classes_, 0);
        right_buf_.assign(n_classes_, 0);
        std::int64_t n_left = 0;
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t r = static_cast<std::size_t>(idx_[i]);
            if (X_.at(r, static_cast<std::size_t>(f)) < theta) {
                ++left_buf_[static_cast<std::size_t>(y_[r])];
                ++n_left;
            } else {
                ++right_buf_[static_cast<std::size_t>(y_[r])];
            }
        }
        const auto n = static_cast<std::int64_t>(end - begin);
        if (n_left < spec_.min_samples_leaf || n - n_left < spec_.min_samples_leaf) return s;
        s.feature = f;
        s.threshold = theta;
        s.score = side_score(left_buf_, static_cast<double>(n_left)) +
                  side_score(right_buf_, static_cast<double>(n - n_left));
        return s;
    }

    Split try_exact(std::int32_t f, std::size_t begin, std::size_t end, bool& constant) {
        sort_buf_.clear();
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t r = static_cast<std::size_t>(idx_[i]);
            sort_buf_.emplace_back(X_.at(r, static_cast<std::size_t>(f)), y_[r]);
        }
        std::sort(sort_buf_.begin(), sort_buf_.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        Split s;
        if (!(sort_buf_.back().first > sort_buf_.front().first)) {
            constant = true;
            return s;
        }
        const auto n = static_cast<std::int64_t>(sort_buf_.size());
        left_buf_.assign(n_classes_, 0);
        right_buf_.assign(n_classes_, 0);
        auto& left = left_buf_;
        auto& right = right_buf_;
        for (const auto& [v, c] : sort_buf_) ++right[static_cast<std::size_t>(c)];
        // Incremental sum of squared counts lets each boundary be scored O(1).
        double ssq_l = 0.0, ssq_r = 0.0;
        for (const std::int64_t c : right) ssq_r += static_cast<double>(c) * static_cast<double>(c);
        std::int64_t n_left = 0;
        for (std::int64_t i = 0; i + 1 < n; ++i) {
            const auto cls = static_cast<std::size_t>(sort_buf_[static_cast<std::size_t>(i)].second);
            ssq_l += 2.0 * static_cast<double>(left[cls]) + 1.0;
            ssq_r -= 2.0 * static_cast<double>(right[cls]) - 1.0;
            ++left[cls];
            --right[cls];
            ++n_left;
            const double v = sort_buf_[static_cast<std::size_t>(i)].first;
            const double next = sort_buf_[static_cast<std::size_t>(i + 1)].first;
            if (!(next > v)) continue;
            if (n_left < spec_.min_samples_leaf || n - n_left < spec_.min_samples_leaf)
                continue;
            const double score = (static_cast<double>(n_left) - ssq_l / static_cast<double>(n_left)) +
                                 (static_cast<double>(n - n_left) -
                                  ssq_r / static_cast<double>(n - n_left));
            if (score < s.score) {
                s.feature = f;
                s.threshold = v + 0.5 * (next - v);
                s.score = score;
            }
        }
        return s;
    }

    const FeatureMatrix& X_;
    const std::vector<std::int32_t>& y_;
    std::size_t n_classes_;
    const EnsembleSpec& spec_;
    Rng rng_;
    std::size_t mtry_ = 1;
    std::vector<std::int32_t> idx_;
    std::vector<std::int32_t> feat_order_;
    std::vector<std::pair<double, std::int32_t>> sort_buf_;
    std::vector<std::int64_t> counts_buf_;
    std::vector<std::int64_t> left_buf_;
    std::vector<std::int64_t> right_buf_;
    std::vector<TreeNode>* nodes_ = nullptr;
};

}  // namespace detail

// One classification head: an ensemble voting over mapped class indices.
struct HeadModel {
    ClassMap classes;
    std::vector<Tree> trees;

    std::int32_t predict_index(const double* row) const {
        static thread_local std::vector<std::int32_t> votes;
        votes.assign(classes.size(), 0);
        for (const Tree& t : trees) ++votes[static_cast<std::size_t>(t.predict(row))];
        std::int32_t best = 0;
        for (std::size_t c = 1; c < votes.size(); ++c)
            if (votes[c] > votes[static_cast<std::size_t>(best)])
                best = static_cast<std::int32_t>(c);
        return best;
    }

    std::int32_t predict_label(const double* row) const {
        return classes.label_of(predict_index(row));
    }

    std::size_t total_nodes() const {
        std::size_t n = 0;
        for (const Tree& t : trees) n += t.nodes.size();
        return n;
    }
};

inline HeadModel train_head(const FeatureMatrix& X, const std::vector<std::int32_t>& labels,
                            const EnsembleSpec& spec, std::string_view head_tag,
                            unsigned n_threads = 1) {
    spec.validate();
    if (X.n_rows == 0) throw std::invalid_argument("empty training set");
    if (labels.size() != X.n_rows)
        throw std::invalid_argument("label count does not match row count");
    HeadModel head;
    head.classes = ClassMap::from_labels(labels);
    std::vector<std::int32_t> y(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
        y[i] = head.classes.index_of(labels[i]);
    head.trees.resize(static_cast<std::size_t>(spec.n_trees));
    for_ranges(head.trees.size(), n_threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t t = begin; t < end; ++t) {
            detail::TreeBuilder builder(X, y, head.classes.size(), spec,
                                        substream(spec.seed, head_tag, t));
            head.trees[t] = builder.build();
        }
    });
    return head;
}

// --- Two-head predictor --------------------------------------------------------

struct Prediction {
    std::int32_t location = -1;
    std::int32_t timeslot_bin = -1;
};

struct TrainedPredictor {
    std::string mobility_tag;
    std::uint64_t schema_hash = 0;
    EnsembleSpec spec;
    HeadModel location_head;
    HeadModel timeslot_head;

    Prediction predict(const double* row) const {
        return {location_head.predict_label(row), timeslot_head.predict_label(row)};
    }
};

inline TrainedPredictor train_predictor(const std::vector<EnrichedEvent>& train_rows,
                                        const EnsembleSpec& spec,
                                        const std::string& mobility_tag,
                                        unsigned n_threads = 1) {
    if (train_rows.empty()) throw std::invalid_argument("empty training set");
    const FeatureMatrix X = make_feature_matrix(train_rows);
    std::vector<std::int32_t> y_loc(train_rows.size());
    std::vector<std::int32_t> y_slot(train_rows.size());
    for (std::size_t i = 0; i < train_rows.size(); ++i) {
        y_loc[i] = train_rows[i].label_location;
        y_slot[i] = train_rows[i].label_timeslot_bin;
    }
    TrainedPredictor model;
    model.mobility_tag = mobility_tag;
    model.schema_hash = feature_schema_hash();
    model.spec = spec;
    model.location_head = train_head(X, y_loc, spec, "head/location", n_threads);
    model.timeslot_head = train_head(X, y_slot, spec, "head/timeslot", n_threads);
    return model;
}

// --- Evaluation ------------------------------------------------------------------

struct PopulationOutcome {
    std::size_t n = 0;
    std::size_t n_location_correct = 0;
    std::size_t n_both_correct = 0;

    double accuracy() const {
        return n ? static_cast<double>(n_both_correct) / static_cast<double>(n) : 0.0;
    }
};

struct AccuracyReport {
    std::size_t n = 0;
    std::size_t n_location_correct = 0;
    std::size_t n_both_correct = 0;
    std::map<std::string, PopulationOutcome> by_truth;
    std::vector<Prediction> predictions;  // aligned with the evaluated rows

    double accuracy() const {
        return n ? static_cast<double>(n_both_correct) / static_cast<double>(n) : 0.0;
    }
    double location_accuracy() const {
        return n ? static_cast<double>(n_location_correct) / static_cast<double>(n) : 0.0;
    }
};

// An event scores only when the location is right AND the dwell bin is right.
inline AccuracyReport evaluate(const TrainedPredictor& model,
                               const std::vector<EnrichedEvent>& rows,
                               unsigned n_threads = 1) {
    if (rows.empty()) throw std::invalid_argument("empty evaluation set");
    if (model.schema_hash != feature_schema_hash())
        throw std::runtime_error("model schema does not match current features");
    const FeatureMatrix X = make_feature_matrix(rows);
    AccuracyReport report;
    report.predictions.resize(rows.size());
    for_ranges(rows.size(), n_threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            report.predictions[i] = model.predict(X.row(i));
    });
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const bool loc_ok = report.predictions[i].location == rows[i].label_location;
        const bool both_ok =
            loc_ok && report.predictions[i].timeslot_bin == rows[i].label_timeslot_bin;
        PopulationOutcome& pop = report.by_truth[rows[i].truth_label];
        ++report.n;
        ++pop.n;
        if (loc_ok) {
            ++report.n_location_correct;
            ++pop.n_location_correct;
        }
        if (both_ok) {
            ++report.n_both_correct;
            ++pop.n_both_correct;
        }
    }
    return report;
}

// The total accuracy must equal the event-weighted mean of per-population
// accuracies; with integer counts this is exact, so any mismatch is a bug.
inline void verify_decomposition(const AccuracyReport& report) {
    std::size_t n = 0, loc = 0, both = 0;
    for (const auto& [label, pop] : report.by_truth) {
        n += pop.n;
        loc += pop.n_location_correct;
        both += pop.n_both_correct;
    }
    if (n != report.n || loc != report.n_location_correct || both != report.n_both_correct)
        throw std::logic_error("population breakdown does not sum to totals");
}

// --- Serialization ----------------------------------------------------------------

namespace detail {

inline void write_u32(std::string& out, std::uint32_t v) {
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

inline void write_u64(std::string& out, std::uint64_t v) {
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

inline std::uint32_t read_u32(const char*& p) {
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(*p++)) << (8 * b);
    return v;
}

inline std::uint64_t read_u64(const char*& p) {
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(*p++)) << (8 * b);
    return v;
}

inline void append_head_nodes(std::string& out, const HeadModel& head) {
    for (const Tree& tree : head.trees) {
        write_u32(out, static_cast<std::uint32_t>(tree.nodes.size()));
        for (const TreeNode& n : tree.nodes) {
            write_u32(out, static_cast<std::uint32_t>(n.feature));
            std::uint64_t bits = 0;
            static_assert(sizeof(bits) == sizeof(n.threshold));
            std::memcpy(&bits, &n.threshold, sizeof(bits));
            write_u64(out, bits);
            write_u32(out, static_cast<std::uint32_t>(n.left));
            write_u32(out, static_cast<std::uint32_t>(n.label));
        }
    }
}

inline void read_head_nodes(const char*& p, const char* end, HeadModel& head,
                            std::size_t n_trees) {
    head.trees.resize(n_trees);
    for (Tree& tree : head.trees) {
        if (end - p < 4) throw std::runtime_error("model file truncated");
        const std::uint32_t count = read_u32(p);
        if (static_cast<std::size_t>(end - p) < count * 20ull)
            throw std::runtime_error("model file truncated");
        tree.nodes.resize(count);
        for (TreeNode& n : tree.nodes) {
            n.feature = static_cast<std::int32_t>(read_u32(p));
            const std::uint64_t bits = read_u64(p);
            std::memcpy(&n.threshold, &bits, sizeof(n.threshold));
            n.left = static_cast<std::int32_t>(read_u32(p));
            n.label = static_cast<std::int32_t>(read_u32(p));
        }
    }
}

}  // namespace detail

inline constexpr const char* kModelMagic = "MOBSIM-MODEL1";

inline void save_model(const TrainedPredictor& model, const std::string& path) {
    nlohmann::json header;
    header["mobility"] = model.mobility_tag;
    header["schema_hash"] = model.schema_hash;
    header["spec"] = {{"n_trees", model.spec.n_trees},
                      {"max_depth", model.spec.max_depth},
                      {"min_samples_split", model.spec.min_samples_split},
                      {"min_samples_leaf", model.spec.min_samples_leaf},
                      {"mtry", model.spec.mtry},
                      {"bootstrap", model.spec.bootstrap},
                      {"exact_thresholds", model.spec.exact_thresholds},
                      {"seed", model.spec.seed}};
    header["location_classes"] = model.location_head.classes.classes;
    header["timeslot_classes"] = model.timeslot_head.classes.classes;

    std::string out;
    out += kModelMagic;
    out += '\n';
    out += header.dump();
    out += '\n';
    detail::append_head_nodes(out, model.location_head);
    detail::append_head_nodes(out, model.timeslot_head);
    csv::write_text(path, out);
}

inline TrainedPredictor load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::size_t magic_end = blob.find('\n');
    if (magic_end == std::string::npos || blob.substr(0, magic_end) != kModelMagic)
        throw std::runtime_error("not a model file: " + path);
    const std::size_t header_end = blob.find('\n', magic_end + 1);
    if (header_end == std::string::npos) throw std::runtime_error("model header missing");
    const nlohmann::json header =
        nlohmann::json::parse(blob.substr(magic_end + 1, header_end - magic_end - 1));

    TrainedPredictor model;
    model.mobility_tag = header.at("mobility").get<std::string>();
    model.schema_hash = header.at("schema_hash").get<std::uint64_t>();
    const auto& spec = header.at("spec");
    model.spec.n_trees = spec.at("n_trees").get<std::int32_t>();
    model.spec.max_depth = spec.at("max_depth").get<std::int32_t>();
    model.spec.min_samples_split = spec.at("min_samples_split").get<std::int32_t>();
    model.spec.min_samples_leaf = spec.at("min_samples_leaf").get<std::int32_t>();
    model.spec.mtry = spec.at("mtry").get<std::int32_t>();
    model.spec.bootstrap = spec.at("bootstrap").get<bool>();
    model.spec.exact_thresholds = spec.at("exact_thresholds").get<bool>();
    model.spec.seed = spec.at("seed").get<std::uint64_t>();
    model.location_head.classes.classes =
        header.at("location_classes").get<std::vector<std::int32_t>>();
    model.timeslot_head.classes.classes =
        header.at("timeslot_classes").get<std::vector<std::int32_t>>();
    if (model.schema_hash != feature_schema_hash())
        throw std::runtime_error("model schema does not match current features");

    const char* p = blob.data() + header_end + 1;
    const char* end = blob.data() + blob.size();
    detail::read_head_nodes(p, end, model.location_head,
                            static_cast<std::size_t>(model.spec.n_trees));
    detail::read_head_nodes(p, end, model.timeslot_head,
                            static_cast<std::size_t>(model.spec.n_trees));
    if (p != end) throw std::runtime_error("trailing bytes in model file");
    return model;
}

}  // namespace mobsim
