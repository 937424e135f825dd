#include "epidet/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace epidet {
namespace {

constexpr const char* kMapFormat = "epidet.detection_map";
constexpr int kMapVersion = 1;

template <class T>
void read_optional(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->template get<T>();
}

}  // namespace

void to_json(json& j, const EpidemicParams& p) {
  j = json{{"beta", p.beta},
           {"gamma", p.gamma},
           {"alpha", p.alpha},
           {"pool_sizes", p.pool_sizes},
           {"sigma_delta", p.sigma_delta}};
}

void from_json(const json& j, EpidemicParams& p) {
  read_optional(j, "beta", p.beta);
  read_optional(j, "gamma", p.gamma);
  read_optional(j, "alpha", p.alpha);
  read_optional(j, "pool_sizes", p.pool_sizes);
  read_optional(j, "sigma_delta", p.sigma_delta);
}

void to_json(json& j, const CostParams& c) { j = json{{"c_fa", c.c_fa}, {"c_delay", c.c_delay}}; }

void from_json(const json& j, CostParams& c) {
  read_optional(j, "c_fa", c.c_fa);
  read_optional(j, "c_delay", c.c_delay);
}

void to_json(json& j, const LoessConfig& c) {
  j = json{{"span", c.span},
           {"degree", c.degree},
           {"min_neighbors", c.min_neighbors},
           {"kernel", c.kernel == KernelKind::tricube ? "tricube" : "uniform"}};
}

void from_json(const json& j, LoessConfig& c) {
  read_optional(j, "span", c.span);
  read_optional(j, "degree", c.degree);
  read_optional(j, "min_neighbors", c.min_neighbors);
  if (auto it = j.find("kernel"); it != j.end()) {
    const auto name = it->get<std::string>();
    if (name == "tricube") {
      c.kernel = KernelKind::tricube;
    } else if (name == "uniform") {
      c.kernel = KernelKind::uniform;
    } else {
      throw std::invalid_argument("unknown loess kernel '" + name + "'");
    }
  }
}

void to_json(json& j, const StateBox& b) {
  j = json{{"lower", b.lower}, {"upper", b.upper}, {"integer", b.integer}};
}

void from_json(const json& j, StateBox& b) {
  b.lower = j.at("lower").get<std::vector<double>>();
  b.upper = j.at("upper").get<std::vector<double>>();
  b.integer = j.at("integer").get<std::vector<bool>>();
}

void to_json(json& j, const SrmcConfig& c) {
  j = json{{"n0", c.n0},
           {"n_batch", c.n_batch},
           {"n_end", c.n_end},
           {"d_candidates", c.d_candidates},
           {"acquisition", std::string(to_string(c.acquisition))},
           {"t_max", c.t_max},
           {"mpc_switch", c.mpc_switch},
           {"tol", c.tol},
           {"master_seed", c.master_seed},
           {"loess", c.loess}};
}

void from_json(const json& j, SrmcConfig& c) {
  read_optional(j, "n0", c.n0);
  read_optional(j, "n_batch", c.n_batch);
  read_optional(j, "n_end", c.n_end);
  read_optional(j, "d_candidates", c.d_candidates);
  if (auto it = j.find("acquisition"); it != j.end()) {
    c.acquisition = parse_acquisition(it->get<std::string>());
  }
  read_optional(j, "t_max", c.t_max);
  read_optional(j, "mpc_switch", c.mpc_switch);
  read_optional(j, "tol", c.tol);
  read_optional(j, "master_seed", c.master_seed);
  read_optional(j, "loess", c.loess);
}

std::string config_hash(const json& config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : config.dump()) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json map_to_json(const DetectionMap& map, const EpidemicParams& params, const SrmcConfig& config,
                 const Provenance& provenance) {
  const auto& model = map.surrogate();
  json inputs = json::array();
  for (Eigen::Index i = 0; i < model.inputs().rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < model.inputs().cols(); ++k) row.push_back(model.inputs()(i, k));
    inputs.push_back(std::move(row));
  }
  json responses = json::array();
  for (Eigen::Index i = 0; i < model.responses().size(); ++i) {
    responses.push_back(model.responses()[i]);
  }
  return json{{"format", kMapFormat},
              {"version", kMapVersion},
              {"provenance",
               {{"config_hash", provenance.config_hash},
                {"master_seed", provenance.master_seed},
                {"method", provenance.method}}},
              {"iteration", map.iteration()},
              {"variant", std::string(to_string(map.variant()))},
              {"epidemic", params},
              {"costs", map.costs()},
              {"srmc", config},
              {"loess", model.config()},
              {"domain", map.domain()},
              {"design", {{"inputs", std::move(inputs)}, {"responses", std::move(responses)}}}};
}

LoadedMap map_from_json(const json& doc) {
  if (doc.value("format", std::string{}) != kMapFormat) {
    throw std::invalid_argument("not a detection map document");
  }
  if (doc.value("version", 0) != kMapVersion) {
    throw std::invalid_argument("unsupported detection map version");
  }
  const auto& rows = doc.at("design").at("inputs");
  const auto& resp = doc.at("design").at("responses");
  if (rows.empty() || rows.size() != resp.size()) {
    throw std::invalid_argument("map design is empty or inconsistent");
  }
  const std::size_t dim = rows.at(0).size();
  Eigen::MatrixXd inputs(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  Eigen::VectorXd responses(static_cast<Eigen::Index>(resp.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != dim) throw std::invalid_argument("ragged map design");
    for (std::size_t k = 0; k < dim; ++k) {
      inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k].get<double>();
    }
    responses[static_cast<Eigen::Index>(i)] = resp[i].get<double>();
  }
  const auto loess = doc.at("loess").get<LoessConfig>();
  const auto costs = doc.at("costs").get<CostParams>();
  const auto domain = doc.at("domain").get<StateBox>();
  const auto variant = parse_variant(doc.at("variant").get<std::string>());
  const auto& prov = doc.at("provenance");
  return LoadedMap{
      DetectionMap(LoessModel::fit(inputs, responses, loess), costs, variant,
                   doc.at("iteration").get<std::size_t>(), domain),
      doc.at("epidemic").get<EpidemicParams>(), doc.at("srmc").get<SrmcConfig>(),
      Provenance{prov.at("config_hash").get<std::string>(),
                 prov.at("master_seed").get<std::uint64_t>(), prov.at("method").get<std::string>()}};
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("malformed JSON in " + path + ": " + e.what());
  }
}

LoadedMap load_map(const std::string& path) { return map_from_json(load_json(path)); }

void save_json(const std::string& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << doc.dump(1) << '\n';
}

}  // namespace epidet
