#include "lbai/instance_io.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

#include "lbai/generators.hpp"

namespace lbai {

nlohmann::json instance_to_json(const BanditInstance& instance) {
    nlohmann::json doc;
    doc["k"] = instance.arms();
    doc["t"] = instance.horizon();
    doc["label"] = instance.label();
    if (const auto& spec = instance.generator()) {
        doc["kind"] = "generator";
        doc["generator"] = {{"name", spec->name}, {"params", spec->params}, {"seed", spec->seed}};
        return doc;
    }
    doc["kind"] = "dense";
    std::vector<double> flat;
    flat.reserve(instance.arms() * static_cast<std::size_t>(instance.horizon()));
    std::vector<double> row(static_cast<std::size_t>(instance.horizon()));
    for (std::size_t a = 0; a < instance.arms(); ++a) {
        instance.read_row(a, 1, row);
        flat.insert(flat.end(), row.begin(), row.end());
    }
    doc["rewards"] = std::move(flat);
    return doc;
}

BanditInstance instance_from_json(const nlohmann::json& doc) {
    static const std::set<std::string> known{"k", "t", "label", "kind", "rewards", "generator"};
    for (const auto& [key, _] : doc.items())
        if (!known.count(key)) throw std::invalid_argument("instance file: unknown key '" + key + "'");
    const auto arms = doc.at("k").get<std::size_t>();
    const auto horizon = doc.at("t").get<Round>();
    const auto kind = doc.at("kind").get<std::string>();
    const auto label = doc.value("label", std::string{});

    if (kind == "generator") {
        const auto& g = doc.at("generator");
        GeneratorSpec spec{g.at("name").get<std::string>(), g.value("params", nlohmann::json::object()),
                           g.value("seed", std::uint64_t{0})};
        auto inst = instantiate(spec);
        if (inst.arms() != arms || inst.horizon() != horizon)
            throw std::invalid_argument("instance file: header shape disagrees with generator");
        return inst;
    }
    if (kind != "dense") throw std::invalid_argument("instance file: unknown kind '" + kind + "'");

    auto values = doc.at("rewards").get<std::vector<double>>();
    for (std::size_t i = 0; i < values.size(); ++i) {
        double& v = values[i];
        if (v < -kRewardTolerance || v > 1.0 + kRewardTolerance)
            throw std::out_of_range("instance file: reward out of [0,1] at arm " +
                                    std::to_string(i / static_cast<std::size_t>(horizon)) + ", round " +
                                    std::to_string(i % static_cast<std::size_t>(horizon) + 1));
        v = std::clamp(v, 0.0, 1.0);
    }
    return BanditInstance::dense(arms, horizon, std::move(values), label);
}

void save_instance(const BanditInstance& instance, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << instance_to_json(instance).dump() << '\n';
}

BanditInstance load_instance(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return instance_from_json(nlohmann::json::parse(in));
}

}  // namespace lbai
