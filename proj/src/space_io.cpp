#include "bsekit/space_io.hpp"

namespace bsekit {

nlohmann::json space_to_json(const FiniteFilteredSpace& space) {
    nlohmann::json levels = nlohmann::json::array();
    for (Index k = 0; k < space.steps(); ++k) {
        nlohmann::json nodes = nlohmann::json::array();
        const VectorXd& cp = space.conditional_probabilities(k + 1);
        for (Index i = 0; i < space.node_count(k); ++i) {
            nlohmann::json children = nlohmann::json::array();
            const Index first = space.first_child(k, i);
            for (Index c = first; c < first + space.child_count(k, i); ++c) children.push_back(cp[c]);
            nodes.push_back(std::move(children));
        }
        levels.push_back(std::move(nodes));
    }
    return {{"times", space.grid().times()}, {"levels", std::move(levels)}};
}

FiniteFilteredSpace space_from_json(const nlohmann::json& doc) {
    try {
        TimeGrid grid(doc.at("times").get<std::vector<double>>());
        auto levels = doc.at("levels").get<std::vector<std::vector<std::vector<double>>>>();
        return FiniteFilteredSpace(std::move(grid), std::move(levels));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("/space: ") + e.what());
    }
}

}  // namespace bsekit
