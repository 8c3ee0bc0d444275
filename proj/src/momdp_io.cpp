#include "esr/momdp_io.hpp"

#include <algorithm>
#include <fstream>

namespace esr {

using nlohmann::json;

json momdp_to_json(const Momdp& model) {
    json doc;
    doc["n_states"] = model.n_states();
    doc["n_actions"] = model.n_actions();
    doc["d"] = model.reward_dim();
    doc["gamma"] = model.gamma();
    doc["horizon"] = model.horizon();
    doc["start_state"] = model.start_state();
    doc["extended_range"] = model.extended_range();

    json transitions = json::array();
    json rewards = json::array();
    for (StateId s = 0; s < model.n_states(); ++s) {
        for (ActionId a = 0; a < model.n_actions(); ++a) {
            const auto row = model.transition_row(s, a);
            for (StateId next = 0; next < row.size(); ++next) {
                if (row[next] != 0.0)
                    transitions.push_back({{"s", s}, {"a", a}, {"s_next", next}, {"p", row[next]}});
            }
            const auto r = model.reward(s, a);
            if (std::any_of(r.begin(), r.end(), [](double x) { return x != 0.0; }))
                rewards.push_back({{"s", s}, {"a", a}, {"vector", std::vector<double>(r.begin(), r.end())}});
        }
    }
    doc["transitions"] = std::move(transitions);
    doc["rewards"] = std::move(rewards);
    return doc;
}

Momdp momdp_from_json(const json& doc) {
    try {
        MomdpBuilder builder(doc.at("n_states").get<std::size_t>(), doc.at("n_actions").get<std::size_t>(),
                             doc.at("d").get<std::size_t>());
        builder.gamma(doc.at("gamma").get<double>())
            .horizon(doc.at("horizon").get<int>())
            .start_state(doc.at("start_state").get<StateId>())
            .extended_range(doc.value("extended_range", false));
        for (const auto& t : doc.at("transitions")) {
            builder.add_transition(t.at("s").get<StateId>(), t.at("a").get<ActionId>(),
                                   t.at("s_next").get<StateId>(), t.at("p").get<double>());
        }
        for (const auto& r : doc.at("rewards")) {
            const auto vec = r.at("vector").get<std::vector<double>>();
            builder.reward(r.at("s").get<StateId>(), r.at("a").get<ActionId>(), vec);
        }
        return builder.build();
    } catch (const json::exception& e) {
        throw ModelError(std::string("malformed MOMDP document: ") + e.what());
    }
}

Momdp read_momdp(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ModelError("cannot parse " + path.string() + ": " + e.what());
    }
    return momdp_from_json(doc);
}

void write_momdp(const Momdp& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << momdp_to_json(model).dump(2) << '\n';
}

}  // namespace esr
