#include "ringtrace/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace ringtrace {
namespace {

using njson = nlohmann::json;

bool valid_hex(std::string_view s) {
    if (s.empty() || s.size() % 2 != 0)
        return false;
    for (char c : s)
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f')))
            return false;
    return true;
}

const njson& field(const njson& obj, const char* name, std::size_t line) {
    auto it = obj.find(name);
    if (it == obj.end())
        throw SyntaxError(std::string("missing field \"") + name + "\"", line);
    return *it;
}

std::uint64_t get_uint(const njson& obj, const char* name, std::size_t line) {
    const njson& v = field(obj, name, line);
    if (!v.is_number_unsigned())
        throw SyntaxError(std::string("field \"") + name + "\" must be a non-negative integer", line);
    return v.get<std::uint64_t>();
}

std::int64_t get_int(const njson& obj, const char* name, std::size_t line) {
    const njson& v = field(obj, name, line);
    if (!v.is_number_integer())
        throw SyntaxError(std::string("field \"") + name + "\" must be an integer", line);
    return v.get<std::int64_t>();
}

bool get_bool(const njson& obj, const char* name, std::size_t line) {
    const njson& v = field(obj, name, line);
    if (!v.is_boolean())
        throw SyntaxError(std::string("field \"") + name + "\" must be a boolean", line);
    return v.get<bool>();
}

std::string get_hex(const njson& obj, const char* name, std::size_t line) {
    const njson& v = field(obj, name, line);
    if (!v.is_string())
        throw SyntaxError(std::string("field \"") + name + "\" must be a string", line);
    std::string s = v.get<std::string>();
    if (!valid_hex(s))
        throw SyntaxError(std::string("field \"") + name +
                          "\" must be lowercase hex of even length, got \"" + s + "\"", line);
    return s;
}

const njson& get_array(const njson& obj, const char* name, std::size_t line) {
    const njson& v = field(obj, name, line);
    if (!v.is_array())
        throw SyntaxError(std::string("field \"") + name + "\" must be an array", line);
    return v;
}

njson parse_object_line(const std::string& text, std::size_t line) {
    // Duplicate keys are silently collapsed by the parser, so track them
    // through the SAX callback.
    std::vector<std::unordered_set<std::string>> keys;
    std::string dup;
    auto cb = [&](int, njson::parse_event_t event, njson& parsed) {
        switch (event) {
        case njson::parse_event_t::object_start:
            keys.emplace_back();
            break;
        case njson::parse_event_t::object_end:
            keys.pop_back();
            break;
        case njson::parse_event_t::key:
            if (dup.empty() && !keys.back().insert(parsed.get<std::string>()).second)
                dup = parsed.get<std::string>();
            break;
        default:
            break;
        }
        return true;
    };
    njson j;
    try {
        j = njson::parse(text, cb);
    } catch (const njson::parse_error& e) {
        throw SyntaxError(e.what(), line);
    }
    if (!dup.empty())
        throw DuplicateField("duplicate field \"" + dup + "\"", line);
    if (!j.is_object())
        throw SyntaxError("expected a JSON object", line);
    return j;
}

RawBlock parse_block_line(const std::string& text, std::size_t line) {
    njson j = parse_object_line(text, line);
    RawBlock blk;
    blk.line = line;
    std::uint64_t h = get_uint(j, "height", line);
    if (h > 0xfffffffeull)
        throw SyntaxError("height out of range", line);
    blk.height = static_cast<std::uint32_t>(h);
    blk.timestamp = get_int(j, "timestamp", line);
    for (const njson& jt : get_array(j, "txs", line)) {
        if (!jt.is_object())
            throw SyntaxError("tx must be an object", line);
        RawTx tx;
        tx.hash = get_hex(jt, "hash", line);
        tx.coinbase = get_bool(jt, "coinbase", line);
        for (const njson& ji : get_array(jt, "inputs", line)) {
            if (!ji.is_object())
                throw SyntaxError("input must be an object", line);
            RawRing ring;
            ring.key_image = get_hex(ji, "key_image", line);
            for (const njson& jm : get_array(ji, "members", line)) {
                if (!jm.is_object())
                    throw SyntaxError("member must be an object", line);
                RawRef ref;
                ref.amount = get_uint(jm, "amount", line);
                std::uint64_t idx = get_uint(jm, "index", line);
                if (idx > 0xfffffffeull)
                    throw SyntaxError("member index out of range", line);
                ref.index = static_cast<std::uint32_t>(idx);
                ring.members.push_back(ref);
            }
            tx.inputs.push_back(std::move(ring));
        }
        for (const njson& jo : get_array(jt, "outputs", line)) {
            if (!jo.is_object())
                throw SyntaxError("output must be an object", line);
            tx.outputs.push_back(RawOutput{get_uint(jo, "amount", line)});
        }
        blk.txs.push_back(std::move(tx));
    }
    return blk;
}

bool blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::vector<RawBlock> parse_lines(std::istream& in) {
    std::vector<RawBlock> blocks;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (blank(text))
            continue;
        RawBlock blk = parse_block_line(text, line);
        if (!blocks.empty() && blk.height != blocks.back().height + 1)
            throw HeightGap("height " + std::to_string(blk.height) + " after " +
                                std::to_string(blocks.back().height),
                            line);
        blocks.push_back(std::move(blk));
    }
    return blocks;
}

} // namespace

std::vector<RawBlock> parse_branch_file(std::istream& in) { return parse_lines(in); }

std::vector<RawBlock> parse_branch_text(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_lines(in);
}

std::string block_to_json_line(const RawBlock& block) {
    std::string s;
    s.reserve(64 + block.txs.size() * 96);
    s += "{\"height\":";
    s += std::to_string(block.height);
    s += ",\"timestamp\":";
    s += std::to_string(block.timestamp);
    s += ",\"txs\":[";
    bool first_tx = true;
    for (const RawTx& tx : block.txs) {
        if (!first_tx)
            s += ',';
        first_tx = false;
        s += "{\"hash\":\"";
        s += tx.hash;
        s += tx.coinbase ? "\",\"coinbase\":true,\"inputs\":[" : "\",\"coinbase\":false,\"inputs\":[";
        bool first_in = true;
        for (const RawRing& ring : tx.inputs) {
            if (!first_in)
                s += ',';
            first_in = false;
            s += "{\"key_image\":\"";
            s += ring.key_image;
            s += "\",\"members\":[";
            bool first_m = true;
            for (const RawRef& m : ring.members) {
                if (!first_m)
                    s += ',';
                first_m = false;
                s += "{\"amount\":";
                s += std::to_string(m.amount);
                s += ",\"index\":";
                s += std::to_string(m.index);
                s += '}';
            }
            s += "]}";
        }
        s += "],\"outputs\":[";
        bool first_o = true;
        for (const RawOutput& o : tx.outputs) {
            if (!first_o)
                s += ',';
            first_o = false;
            s += "{\"amount\":";
            s += std::to_string(o.amount);
            s += '}';
        }
        s += "]}";
    }
    s += "]}";
    return s;
}

ForkSpec load_fork_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open fork spec: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    njson j;
    try {
        j = njson::parse(buf.str());
    } catch (const njson::parse_error& e) {
        throw ConfigError("fork spec parse error: " + std::string(e.what()));
    }
    if (!j.is_object() || !j.contains("branches") || !j["branches"].is_array())
        throw ConfigError("fork spec must be an object with a \"branches\" array");
    ForkSpec spec;
    for (const njson& jb : j["branches"]) {
        BranchDesc d;
        if (!jb.is_object() || !jb.contains("name") || !jb["name"].is_string() ||
            !jb.contains("file") || !jb["file"].is_string())
            throw ConfigError("branch descriptor needs string \"name\" and \"file\"");
        d.name = jb["name"].get<std::string>();
        std::filesystem::path f = jb["file"].get<std::string>();
        d.file = f.is_absolute() ? f : path.parent_path() / f;
        if (jb.contains("parent") && !jb["parent"].is_null())
            d.parent = jb["parent"].get<std::string>();
        if (jb.contains("fork_height") && !jb["fork_height"].is_null()) {
            if (!jb["fork_height"].is_number_unsigned())
                throw ConfigError("fork_height must be a non-negative integer");
            d.fork_height = jb["fork_height"].get<std::uint32_t>();
        }
        spec.branches.push_back(std::move(d));
    }
    return spec;
}

namespace detail {

struct ParsedBranch {
    std::string name;
    std::optional<std::string> parent;
    std::optional<std::uint32_t> fork_height;
    std::vector<RawBlock> blocks;
    std::string parse_error; // non-empty when the file failed to parse
    std::string parse_rule;
};

namespace {

void check_spec_shape(const std::vector<ParsedBranch>& branches) {
    std::unordered_set<std::string> names;
    std::size_t roots = 0;
    for (const auto& b : branches) {
        if (!names.insert(b.name).second)
            throw ConfigError("duplicate branch name: " + b.name);
        if (!b.parent) {
            ++roots;
            if (b.fork_height)
                throw ConfigError("root branch must not have a fork height");
        } else {
            if (!b.fork_height)
                throw ConfigError("branch " + b.name + " has a parent but no fork height");
            if (*b.fork_height == 0)
                throw ConfigError("fork height must be strictly positive");
        }
    }
    if (roots != 1)
        throw ConfigError("fork spec must have exactly one root branch");
    for (const auto& b : branches)
        if (b.parent && !names.count(*b.parent))
            throw ConfigError("unknown parent branch: " + *b.parent);
}

/// Topological order (parents first), preserving spec order among ready
/// branches. Throws on cycles.
std::vector<std::size_t> topo_order(const std::vector<ParsedBranch>& branches) {
    std::vector<std::size_t> order;
    std::vector<bool> placed(branches.size(), false);
    std::unordered_set<std::string> done;
    while (order.size() < branches.size()) {
        bool progress = false;
        for (std::size_t i = 0; i < branches.size(); ++i) {
            if (placed[i])
                continue;
            if (!branches[i].parent || done.count(*branches[i].parent)) {
                placed[i] = true;
                done.insert(branches[i].name);
                order.push_back(i);
                progress = true;
            }
        }
        if (!progress)
            throw ConfigError("fork spec contains a parent cycle");
    }
    return order;
}

} // namespace
} // namespace detail

using detail::ParsedBranch;

class LedgerBuilder {
public:
    BuildResult run(std::vector<ParsedBranch> parsed) {
        using detail::check_spec_shape;
        using detail::topo_order;
        check_spec_shape(parsed);
        auto order = topo_order(parsed);

        // Branch table in spec order; processing follows topo order.
        for (const auto& p : parsed) {
            Branch br;
            br.name = p.name;
            builder_names_[p.name] = static_cast<BranchIndex>(view_.branches_.size());
            view_.branches_.push_back(std::move(br));
        }
        for (std::size_t i = 0; i < parsed.size(); ++i) {
            Branch& br = view_.branches_[i];
            if (parsed[i].parent) {
                br.parent = builder_names_.at(*parsed[i].parent);
                br.fork_height = *parsed[i].fork_height;
            }
            if (!parsed[i].parse_error.empty())
                fatal(parsed[i].parse_rule, parsed[i].name, parsed[i].parse_error);
        }

        for (std::size_t i : order)
            assign_outputs(static_cast<BranchIndex>(i), parsed[i]);
        for (std::size_t i : order)
            build_rings(static_cast<BranchIndex>(i), parsed[i]);
        compute_ring_branches();
        build_instances();
        check_cross_chain();
        fill_counts();

        BuildResult result;
        result.report = std::move(report_);
        if (result.report.ok())
            result.view = std::move(view_);
        return result;
    }

private:
    void fatal(std::string rule, std::string location, std::string message) {
        report_.violations.push_back(
            {Severity::Fatal, std::move(rule), std::move(location), std::move(message)});
    }
    void warn(std::string rule, std::string location, std::string message) {
        report_.violations.push_back(
            {Severity::Warning, std::move(rule), std::move(location), std::move(message)});
    }

    std::uint32_t count_below(BranchIndex b, Amount amount, std::uint32_t height) const {
        const Branch& br = view_.branches_[b];
        std::uint32_t n = 0;
        if (br.parent != kNone32) {
            if (height <= br.fork_height)
                return count_below(br.parent, amount, height);
            if (auto it = br.prefix_counts.find(amount); it != br.prefix_counts.end())
                n = it->second;
        }
        auto it = br.own_outputs.find(amount);
        if (it == br.own_outputs.end())
            return n;
        const auto& uids = it->second;
        auto pos = std::partition_point(uids.begin(), uids.end(), [&](OutputUid u) {
            return view_.outputs_[u].height < height;
        });
        return n + static_cast<std::uint32_t>(pos - uids.begin());
    }

    void assign_outputs(BranchIndex bi, const ParsedBranch& p) {
        Branch& br = view_.branches_[bi];
        if (br.parent != kNone32) {
            const Branch& parent = view_.branches_[br.parent];
            if (br.fork_height < parent.fork_height)
                fatal("ForkBelowParentStart", br.name,
                      "fork height " + std::to_string(br.fork_height) +
                          " precedes parent's first own block");
            if (br.fork_height > parent.tip_height())
                fatal("ForkHeightBeyondParent", br.name,
                      "fork height " + std::to_string(br.fork_height) +
                          " beyond parent tip " + std::to_string(parent.tip_height()));
            // Per-amount index spaces continue across the fork.
            std::unordered_set<Amount> amounts;
            for (const Branch* a = &parent;;) {
                for (const auto& [amount, _] : a->own_outputs)
                    amounts.insert(amount);
                if (a->parent == kNone32)
                    break;
                a = &view_.branches_[a->parent];
            }
            for (Amount amount : amounts)
                br.prefix_counts[amount] = count_below(br.parent, amount, br.fork_height);
            if (!p.blocks.empty() && p.blocks.front().height != br.fork_height)
                fatal("ChildStartHeight", br.name,
                      "child file starts at height " + std::to_string(p.blocks.front().height) +
                          ", fork height is " + std::to_string(br.fork_height));
        } else {
            if (!p.blocks.empty() && p.blocks.front().height > 1)
                fatal("RootStartHeight", br.name,
                      "root file starts at height " + std::to_string(p.blocks.front().height));
            br.fork_height = p.blocks.empty() ? 0 : p.blocks.front().height;
        }

        for (const RawBlock& rb : p.blocks) {
            Block blk;
            blk.height = rb.height;
            blk.timestamp = rb.timestamp;
            if (rb.txs.empty())
                warn("EmptyBlock", br.name + ":" + std::to_string(rb.height), "block has no transactions");
            for (const RawTx& rt : rb.txs) {
                TxIndex ti = static_cast<TxIndex>(view_.txs_.size());
                Transaction tx;
                tx.hash = rt.hash;
                tx.coinbase = rt.coinbase;
                tx.origin_branch = bi;
                tx.height = rb.height;
                tx.time = rb.timestamp;
                if (rt.coinbase && !rt.inputs.empty())
                    fatal("CoinbaseHasInputs", br.name + ":" + std::to_string(rb.height),
                          "coinbase tx " + rt.hash + " has inputs");
                for (const RawOutput& ro : rt.outputs) {
                    OutputUid uid = static_cast<OutputUid>(view_.outputs_.size());
                    auto& per_amount = br.own_outputs[ro.amount];
                    std::uint32_t prefix = 0;
                    if (auto it = br.prefix_counts.find(ro.amount); it != br.prefix_counts.end())
                        prefix = it->second;
                    Output out;
                    out.uid = uid;
                    out.amount = ro.amount;
                    out.index = prefix + static_cast<std::uint32_t>(per_amount.size());
                    out.origin_branch = bi;
                    out.height = rb.height;
                    out.created_at = rb.timestamp;
                    out.creating_tx = ti;
                    per_amount.push_back(uid);
                    view_.outputs_.push_back(out);
                    tx.outputs.push_back(uid);
                }
                blk.txs.push_back(ti);
                view_.txs_.push_back(std::move(tx));
            }
            br.blocks.push_back(std::move(blk));
        }
    }

    void build_rings(BranchIndex bi, const ParsedBranch& p) {
        Branch& br = view_.branches_[bi];
        std::size_t block_idx = 0;
        for (const RawBlock& rb : p.blocks) {
            Block& blk = br.blocks[block_idx++];
            std::size_t tx_pos = 0;
            for (const RawTx& rt : rb.txs) {
                Transaction& tx = view_.txs_[blk.txs[tx_pos++]];
                for (const RawRing& rr : rt.inputs) {
                    std::string loc = br.name + ":" + std::to_string(rb.height);
                    if (rr.members.empty()) {
                        fatal("EmptyRing", loc, "ring " + rr.key_image + " has no members");
                        continue;
                    }
                    Ring ring;
                    ring.key_image = intern_ki(rr.key_image);
                    ring.spending_tx = blk.txs[tx_pos - 1];
                    ring.origin_branch = bi;
                    ring.height = rb.height;
                    ring.spend_time = rb.timestamp;
                    bool bad = false;
                    for (const RawRef& m : rr.members) {
                        OutputUid uid;
                        try {
                            uid = view_.resolve(OutputRef{m.amount, m.index}, bi);
                        } catch (const UnknownOutputRef& e) {
                            fatal("UnknownOutputRef", loc, e.what());
                            bad = true;
                            break;
                        }
                        if (view_.outputs_[uid].height >= rb.height) {
                            fatal("MemberNotYetCreated", loc,
                                  "ring " + rr.key_image + " references an output created at height " +
                                      std::to_string(view_.outputs_[uid].height));
                            bad = true;
                            break;
                        }
                        if (std::find(ring.members.begin(), ring.members.end(), uid) !=
                            ring.members.end()) {
                            fatal("DuplicateRingMember", loc,
                                  "ring " + rr.key_image + " lists a member twice");
                            bad = true;
                            break;
                        }
                        ring.members.push_back(uid);
                    }
                    if (bad)
                        continue;
                    tx.inputs.push_back(static_cast<RingIndex>(view_.rings_.size()));
                    view_.rings_.push_back(std::move(ring));
                }
            }
        }
    }

    void compute_ring_branches() {
        // For each branch, the cutoff height below which an ancestor's block
        // is shared with it.
        std::size_t nb = view_.branches_.size();
        std::vector<std::unordered_map<BranchIndex, std::uint32_t>> cutoff(nb);
        for (BranchIndex b = 0; b < nb; ++b) {
            std::uint32_t cut = 0xffffffffu;
            cutoff[b][b] = cut;
            for (BranchIndex cur = b; view_.branches_[cur].parent != kNone32;) {
                cut = std::min(cut, view_.branches_[cur].fork_height);
                cur = view_.branches_[cur].parent;
                cutoff[b][cur] = cut;
            }
        }
        for (Ring& ring : view_.rings_)
            for (BranchIndex b = 0; b < nb; ++b) {
                auto it = cutoff[b].find(ring.origin_branch);
                if (it != cutoff[b].end() && ring.height < it->second)
                    ring.branches.push_back(b);
            }
    }

    void build_instances() {
        for (BranchIndex b = 0; b < view_.branches_.size(); ++b) {
            Branch& br = view_.branches_[b];
            br.first_instance = static_cast<std::uint32_t>(view_.instances_.size());
            view_.walk_timeline(b, [&](BranchIndex, const Block& blk) {
                for (TxIndex ti : blk.txs)
                    for (RingIndex ri : view_.txs_[ti].inputs) {
                        KeyImageId ki = view_.rings_[ri].key_image;
                        InstanceIndex inst = static_cast<InstanceIndex>(view_.instances_.size());
                        auto [it, fresh] = br.key_images.emplace(ki, inst);
                        if (!fresh) {
                            fatal("DuplicateKeyImageOnBranch",
                                  br.name + ":" + std::to_string(blk.height),
                                  "key image " + view_.ki_names_[ki] +
                                      " spent twice on one branch");
                            continue;
                        }
                        view_.instances_.push_back(RingInstance{ri, b});
                        if (ki >= view_.ki_branches_.size())
                            view_.ki_branches_.resize(ki + 1);
                        view_.ki_branches_[ki].push_back(b);
                    }
            });
            br.end_instance = static_cast<std::uint32_t>(view_.instances_.size());
        }
        view_.ki_branches_.resize(view_.ki_names_.size());
    }

    void check_cross_chain() {
        for (KeyImageId ki = 0; ki < view_.ki_branches_.size(); ++ki) {
            const auto& brs = view_.ki_branches_[ki];
            if (brs.size() < 2)
                continue;
            std::vector<RingIndex> distinct;
            for (BranchIndex b : brs) {
                RingIndex ri = view_.instances_[view_.branches_[b].key_images.at(ki)].ring;
                if (std::find(distinct.begin(), distinct.end(), ri) == distinct.end())
                    distinct.push_back(ri);
            }
            if (distinct.size() < 2)
                continue;
            std::vector<OutputUid> inter = view_.rings_[distinct[0]].members;
            std::sort(inter.begin(), inter.end());
            for (std::size_t i = 1; i < distinct.size() && !inter.empty(); ++i) {
                std::vector<OutputUid> m = view_.rings_[distinct[i]].members;
                std::sort(m.begin(), m.end());
                std::vector<OutputUid> next;
                std::set_intersection(inter.begin(), inter.end(), m.begin(), m.end(),
                                      std::back_inserter(next));
                inter = std::move(next);
            }
            if (inter.empty())
                fatal("DisjointCrossChainRings", view_.ki_names_[ki],
                      "key image appears on multiple branches with disjoint rings");
        }
    }

    void fill_counts() {
        for (BranchIndex b = 0; b < view_.branches_.size(); ++b) {
            ValidationReport::PerBranch pb;
            pb.branch = view_.branches_[b].name;
            auto add = [&](BranchCounts& c, const Block& blk) {
                c.blocks++;
                for (TxIndex ti : blk.txs) {
                    const Transaction& tx = view_.txs_[ti];
                    c.transactions++;
                    c.coinbase_txs += tx.coinbase;
                    c.outputs += tx.outputs.size();
                    for (RingIndex ri : tx.inputs) {
                        const Ring& r = view_.rings_[ri];
                        c.rings++;
                        c.nontrivial_rings += r.nontrivial();
                        c.ring_members += r.members.size();
                    }
                }
            };
            for (const Block& blk : view_.branches_[b].blocks)
                add(pb.own, blk);
            view_.walk_timeline(b, [&](BranchIndex, const Block& blk) { add(pb.total, blk); });
            report_.branches.push_back(std::move(pb));
        }
    }

    KeyImageId intern_ki(const std::string& hex) {
        auto [it, fresh] =
            view_.ki_ids_.emplace(hex, static_cast<KeyImageId>(view_.ki_names_.size()));
        if (fresh)
            view_.ki_names_.push_back(hex);
        return it->second;
    }

    LedgerView view_;
    ValidationReport report_;
    std::unordered_map<std::string, BranchIndex> builder_names_;
};

namespace {

ParsedBranch parse_one(std::string name, std::optional<std::string> parent,
                       std::optional<std::uint32_t> fork_height, std::string content) {
    ParsedBranch p;
    p.name = std::move(name);
    p.parent = std::move(parent);
    p.fork_height = fork_height;
    try {
        p.blocks = parse_branch_text(content);
    } catch (const SyntaxError& e) {
        p.parse_error = e.what();
        p.parse_rule = "SyntaxError";
    } catch (const HeightGap& e) {
        p.parse_error = e.what();
        p.parse_rule = "HeightGap";
    } catch (const DuplicateField& e) {
        p.parse_error = e.what();
        p.parse_rule = "DuplicateField";
    }
    return p;
}

} // namespace

BuildResult build_ledger(const ForkSpec& spec) {
    // Branch files parse independently; assembly is sequential.
    std::vector<std::future<ParsedBranch>> jobs;
    for (const BranchDesc& d : spec.branches)
        jobs.push_back(std::async(std::launch::async, [d]() {
            std::ifstream in(d.file);
            if (!in)
                throw ConfigError("cannot open branch file: " + d.file.string());
            std::stringstream buf;
            buf << in.rdbuf();
            return parse_one(d.name, d.parent, d.fork_height, buf.str());
        }));
    std::vector<ParsedBranch> parsed;
    for (auto& j : jobs)
        parsed.push_back(j.get());
    return LedgerBuilder{}.run(std::move(parsed));
}

BuildResult build_ledger_from_buffers(const std::vector<BranchBuffer>& branches) {
    std::vector<ParsedBranch> parsed;
    for (const BranchBuffer& b : branches)
        parsed.push_back(parse_one(b.name, b.parent, b.fork_height, b.content));
    return LedgerBuilder{}.run(std::move(parsed));
}

LedgerView load_ledger(const std::filesystem::path& fork_spec_path) {
    BuildResult r = build_ledger(load_fork_spec(fork_spec_path));
    if (!r.view) {
        for (const auto& v : r.report.violations)
            if (v.severity == Severity::Fatal)
                throw Error(v.rule + " at " + v.location + ": " + v.message);
        throw Error("ledger build failed");
    }
    return std::move(*r.view);
}

void export_branch(const LedgerView& view, BranchIndex b, std::ostream& out) {
    const Branch& br = view.branch(b);
    for (const Block& blk : br.blocks) {
        RawBlock rb;
        rb.height = blk.height;
        rb.timestamp = blk.timestamp;
        for (TxIndex ti : blk.txs) {
            const Transaction& tx = view.transaction(ti);
            RawTx rt;
            rt.hash = tx.hash;
            rt.coinbase = tx.coinbase;
            for (RingIndex ri : tx.inputs) {
                const Ring& ring = view.ring(ri);
                RawRing rr;
                rr.key_image = view.key_image_name(ring.key_image);
                for (OutputUid uid : ring.members) {
                    OutputRef ref = view.ref_of(uid);
                    rr.members.push_back(RawRef{ref.amount, ref.index});
                }
                rt.inputs.push_back(std::move(rr));
            }
            for (OutputUid uid : tx.outputs)
                rt.outputs.push_back(RawOutput{view.output(uid).amount});
            rb.txs.push_back(std::move(rt));
        }
        out << block_to_json_line(rb) << '\n';
    }
}

} // namespace ringtrace
