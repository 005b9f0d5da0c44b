#include "tep/instance.hpp"

#include <random>
#include <sstream>

#include <json.hpp>

namespace tep {

using nlohmann::json;

std::string QueryId::str() const {
    std::ostringstream os;
    if (kind == Leaf) {
        os << "v" << node;
    } else {
        os << "f" << node << "(" << x << "," << y << ")";
    }
    return os.str();
}

TepInstance::TepInstance(TreeShape shape, int k) : shape_(shape), k_(k) {
    if (k < 2) throw std::invalid_argument("k must be >= 2");
    std::uint64_t m = slot_count(shape, k);
    slots_.assign(m, 1);

    // Both identities for m must agree: leaf slots + table entries, and node
    // values + non-thrifty entries.
    std::uint64_t lhs = (std::uint64_t)shape.leaf_count() + (std::uint64_t)shape.internal_count() * k * k;
    std::uint64_t rhs = (std::uint64_t)shape.node_count() +
                        (std::uint64_t)(k * k - 1) * shape.internal_count();
    if (lhs != m || rhs != m) throw std::logic_error("slot count identities disagree");
}

std::uint64_t TepInstance::slot_count(const TreeShape& shape, int k) {
    return (std::uint64_t)shape.leaf_count() + (std::uint64_t)shape.internal_count() * k * k;
}

int TepInstance::leaf_index(int i) const {
    if (!shape_.is_leaf(i)) throw std::invalid_argument("not a leaf id: " + std::to_string(i));
    return i - shape_.first_leaf();
}

int TepInstance::table_index(int i, int x, int y) const {
    if (!shape_.is_internal(i)) throw std::invalid_argument("not an internal id: " + std::to_string(i));
    if (x < 1 || x > k_ || y < 1 || y > k_) throw std::invalid_argument("table argument out of [k]");
    return shape_.leaf_count() + (i - 1) * k_ * k_ + (x - 1) * k_ + (y - 1);
}

int TepInstance::check_value(int v) const {
    if (v < 1 || v > k_) throw std::invalid_argument("value out of [k]: " + std::to_string(v));
    return v;
}

int TepInstance::slot_index(const QueryId& q) const {
    return q.kind == QueryId::Leaf ? leaf_index(q.node) : table_index(q.node, q.x, q.y);
}

QueryId TepInstance::slot_query(int index) const {
    if (index < shape_.leaf_count()) return QueryId::leaf(shape_.first_leaf() + index);
    int rest = index - shape_.leaf_count();
    int node = rest / (k_ * k_) + 1;
    int entry = rest % (k_ * k_);
    return QueryId::func(node, entry / k_ + 1, entry % k_ + 1);
}

NodeValues evaluate(const TepInstance& instance) {
    const TreeShape& shape = instance.shape();
    NodeValues nv;
    nv.values.assign(shape.node_count() + 1, 0);
    for (int i = shape.node_count(); i >= 1; --i) {
        if (shape.is_leaf(i)) {
            nv.values[i] = (std::uint8_t)instance.leaf(i);
        } else {
            nv.values[i] = (std::uint8_t)instance.table(i, nv.values[shape.left(i)],
                                                        nv.values[shape.right(i)]);
        }
    }
    return nv;
}

std::optional<std::uint64_t> instance_space_size(const TreeShape& shape, int k) {
    return checked_pow((std::uint64_t)k, TepInstance::slot_count(shape, k));
}

TepInstance instance_from_index(const TreeShape& shape, int k, std::uint64_t n) {
    TepInstance inst(shape, k);
    auto& raw = inst.raw();
    for (int j = (int)raw.size() - 1; j >= 0; --j) {
        raw[j] = (std::uint8_t)(n % k + 1);
        n /= k;
    }
    if (n != 0) throw std::invalid_argument("instance index out of range");
    return inst;
}

std::uint64_t instance_to_index(const TepInstance& instance) {
    std::uint64_t n = 0;
    for (std::uint8_t v : instance.raw()) n = n * instance.k() + (v - 1);
    return n;
}

InstanceEnumerator::InstanceEnumerator(TreeShape shape, int k, const Budget& budget)
    : current_(shape, k) {
    auto size = instance_space_size(shape, k);
    if (!size || *size > budget.exhaustive_cap)
        throw budget_error("instance space k^m exceeds enumeration cap (k^" +
                           std::to_string(TepInstance::slot_count(shape, k)) + ")");
    total_ = *size;
}

bool InstanceEnumerator::next(TepInstance& out) {
    if (emitted_ >= total_) return false;
    if (emitted_ > 0) {
        // odometer increment, least significant slot last
        auto& raw = current_.raw();
        for (int j = (int)raw.size() - 1; j >= 0; --j) {
            if (raw[j] < current_.k()) {
                ++raw[j];
                break;
            }
            raw[j] = 1;
        }
    }
    ++emitted_;
    out = current_;
    return true;
}

TepInstance sample_instance(const TreeShape& shape, int k, std::uint64_t seed) {
    TepInstance inst(shape, k);
    std::mt19937_64 rng(seed);
    // rejection sampling keeps the draw uniform and byte-reproducible
    std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                          std::numeric_limits<std::uint64_t>::max() % (std::uint64_t)k;
    for (auto& v : inst.raw()) {
        std::uint64_t x;
        do { x = rng(); } while (x >= limit);
        v = (std::uint8_t)(x % k + 1);
    }
    return inst;
}

TepInstance perturb(const TepInstance& instance, const QueryId& query, int value) {
    TepInstance out = instance;
    out.set_slot(query, value);
    return out;
}

void for_each_instance(const TreeShape& shape, int k, const Budget& budget,
                       const std::function<void(std::uint64_t, const TepInstance&)>& fn) {
    InstanceEnumerator en(shape, k, budget);
    TepInstance inst;
    std::uint64_t idx = 0;
    while (en.next(inst)) fn(idx++, inst);
}

std::string instance_to_json(const TepInstance& instance) {
    const TreeShape& shape = instance.shape();
    json j;
    j["h"] = shape.h;
    j["k"] = instance.k();
    json leaves = json::array();
    for (int i = shape.first_leaf(); i <= shape.node_count(); ++i) leaves.push_back(instance.leaf(i));
    j["leaves"] = leaves;
    json tables = json::object();
    for (int i = 1; i <= shape.internal_count(); ++i) {
        json rows = json::array();
        for (int x = 1; x <= instance.k(); ++x) {
            json row = json::array();
            for (int y = 1; y <= instance.k(); ++y) row.push_back(instance.table(i, x, y));
            rows.push_back(row);
        }
        tables[std::to_string(i)] = rows;
    }
    j["tables"] = tables;
    return j.dump(2) + "\n";
}

TepInstance instance_from_json(const std::string& text) {
    json j = json::parse(text);
    TreeShape shape(j.at("h").get<int>());
    int k = j.at("k").get<int>();
    TepInstance inst(shape, k);
    const auto& leaves = j.at("leaves");
    if ((int)leaves.size() != shape.leaf_count())
        throw std::invalid_argument("leaves array must have 2^(h-1) entries");
    for (int i = 0; i < shape.leaf_count(); ++i)
        inst.set_leaf(shape.first_leaf() + i, leaves[i].get<int>());
    const auto& tables = j.at("tables");
    for (int i = 1; i <= shape.internal_count(); ++i) {
        const auto& rows = tables.at(std::to_string(i));
        if ((int)rows.size() != k) throw std::invalid_argument("table must have k rows");
        for (int x = 1; x <= k; ++x) {
            const auto& row = rows[x - 1];
            if ((int)row.size() != k) throw std::invalid_argument("table row must have k entries");
            for (int y = 1; y <= k; ++y) inst.set_table(i, x, y, row[y - 1].get<int>());
        }
    }
    return inst;
}

Rat parse_rat(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) return Rat(std::stoll(s));
    return Rat(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
}

}  // namespace tep
