#include "esr/table_io.hpp"

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace esr {

namespace {

constexpr char kMagic[4] = {'E', 'S', 'R', 'T'};

template <class T>
void put(std::ostream& out, const T& x) {
    out.write(reinterpret_cast<const char*>(&x), sizeof(T));
}

template <class T>
T get(std::istream& in) {
    T x{};
    if (!in.read(reinterpret_cast<char*>(&x), sizeof(T))) throw TableFormatError("truncated table file");
    return x;
}

template <class T>
void put_array(std::ostream& out, const std::vector<T>& v) {
    put<std::uint64_t>(out, v.size());
    if (!v.empty()) out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <class T>
std::vector<T> get_array(std::istream& in, std::uint64_t expected) {
    const auto n = get<std::uint64_t>(in);
    if (n != 0 && n != expected) throw TableFormatError("layer size does not match header");
    std::vector<T> v(n);
    if (n != 0 && !in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T))))
        throw TableFormatError("truncated table layer");
    return v;
}

}  // namespace

void write_tables(std::ostream& out, const ValueTable& values, const PolicyTable& policy) {
    const TableShape& s = values.shape();
    if (!(s == policy.shape())) throw std::invalid_argument("value and policy tables have different shapes");
    out.write(kMagic, 4);
    put<std::uint32_t>(out, kTableFormatVersion);
    put<double>(out, s.alpha);
    put<std::int32_t>(out, s.horizon);
    put<std::uint64_t>(out, s.d);
    put<double>(out, s.gamma);
    put<std::uint64_t>(out, s.n_states);
    put<std::uint64_t>(out, s.n_actions);
    for (int t = 0; t <= s.horizon; ++t) {
        const auto v = values.layer(t);
        put_array(out, std::vector<double>(v.begin(), v.end()));
        const auto p = policy.layer(t);
        put_array(out, std::vector<PolicyTable::Entry>(p.begin(), p.end()));
    }
    if (!out) throw TableFormatError("failed writing tables");
}

PlanResult read_tables(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw TableFormatError("not a table file");
    const auto version = get<std::uint32_t>(in);
    if (version != kTableFormatVersion) throw TableFormatError("unsupported table version " + std::to_string(version));
    TableShape s;
    s.alpha = get<double>(in);
    s.horizon = get<std::int32_t>(in);
    s.d = get<std::uint64_t>(in);
    s.gamma = get<double>(in);
    s.n_states = get<std::uint64_t>(in);
    s.n_actions = get<std::uint64_t>(in);
    if (!(s.alpha > 0.0) || s.horizon < 0 || s.d == 0 || s.n_states == 0 || s.n_actions == 0)
        throw TableFormatError("invalid table header");
    auto values = std::make_shared<ValueTable>(s);
    auto policy = std::make_shared<PolicyTable>(s);
    for (int t = 0; t <= s.horizon; ++t) {
        const std::uint64_t n = s.layer_size(t);
        values->mutable_layer(t) = get_array<double>(in, n);
        policy->mutable_layer(t) = get_array<PolicyTable::Entry>(in, n);
        for (auto a : policy->layer(t)) {
            if (a >= s.n_actions) throw TableFormatError("policy entry is not a valid action id");
        }
    }
    return {std::move(values), std::move(policy)};
}

void save_tables(const std::string& path, const PlanResult& result) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw TableFormatError("cannot open " + path + " for writing");
    write_tables(out, *result.values, *result.policy);
}

PlanResult load_tables(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TableFormatError("cannot open " + path);
    return read_tables(in);
}

nlohmann::json tables_to_json(const ValueTable& values, const PolicyTable& policy) {
    const TableShape& s = values.shape();
    nlohmann::json j;
    j["alpha"] = s.alpha;
    j["horizon"] = s.horizon;
    j["gamma"] = s.gamma;
    j["d"] = s.d;
    j["n_states"] = s.n_states;
    j["n_actions"] = s.n_actions;
    j["layers"] = nlohmann::json::array();
    for (int t = 0; t <= s.horizon; ++t) {
        nlohmann::json layer;
        layer["steps_remaining"] = t;
        layer["entries"] = nlohmann::json::array();
        if (values.has_layer(t)) {
            const LayerGeometry g = s.layer(t);
            std::vector<LatticeIndex> k(s.d);
            for (std::size_t flat = 0; flat < g.size(); ++flat) {
                g.unflatten(flat, k);
                for (std::size_t st = 0; st < s.n_states; ++st) {
                    nlohmann::json e;
                    e["state"] = st;
                    e["point"] = k;
                    e["value"] = values.layer(t)[flat * s.n_states + st];
                    if (t > 0) e["action"] = policy.layer(t)[flat * s.n_states + st];
                    layer["entries"].push_back(std::move(e));
                }
            }
        }
        j["layers"].push_back(std::move(layer));
    }
    return j;
}

}  // namespace esr
