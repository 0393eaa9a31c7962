#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "mbss/error.hpp"
#include "mbss/gmm.hpp"

namespace mbss {
namespace {

constexpr const char* kFormat = "mbss-mixture-model";
constexpr int kVersion = 1;

nlohmann::json to_json(const Vector& v) {
  auto arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

nlohmann::json to_json(const Matrix& M) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Vector vector_from(const nlohmann::json& j, std::size_t expected) {
  if (!j.is_array() || j.size() != expected) {
    throw DataError("model file: expected an array of length " +
                    std::to_string(expected));
  }
  Vector v(static_cast<Eigen::Index>(expected));
  for (std::size_t i = 0; i < expected; ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

Matrix matrix_from(const nlohmann::json& j, std::size_t d) {
  if (!j.is_array() || j.size() != d) {
    throw DataError("model file: expected a " + std::to_string(d) + "x" +
                    std::to_string(d) + " matrix");
  }
  Matrix M(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t r = 0; r < d; ++r) M.row(static_cast<Eigen::Index>(r)) = vector_from(j[r], d);
  return M;
}

}  // namespace

void save_model(const MixtureModel& model, std::ostream& out) {
  nlohmann::json doc;
  doc["format"] = kFormat;
  doc["version"] = kVersion;
  doc["family"] = std::string(to_string(model.family()));
  doc["components"] = model.num_components();
  doc["dim"] = model.dim();
  doc["weights"] = to_json(model.weights());
  auto means = nlohmann::json::array();
  auto covs = nlohmann::json::array();
  for (const auto& c : model.components()) {
    means.push_back(to_json(c.mean()));
    covs.push_back(to_json(c.covariance()));
  }
  doc["means"] = std::move(means);
  doc["covariances"] = std::move(covs);
  out << doc.dump(1) << '\n';
}

MixtureModel load_model(std::istream& in) {
  nlohmann::json doc;
  try {
    in >> doc;
    if (doc.value("format", "") != kFormat) throw DataError("not an mbss model file");
    if (doc.at("version").get<int>() != kVersion) {
      throw DataError("unsupported model file version");
    }
    const auto family = parse_family(doc.at("family").get<std::string>());
    const auto K = doc.at("components").get<std::size_t>();
    const auto d = doc.at("dim").get<std::size_t>();
    if (K == 0 || d == 0) throw DataError("model file: empty model");
    Vector weights = vector_from(doc.at("weights"), K);
    const auto& means = doc.at("means");
    const auto& covs = doc.at("covariances");
    if (means.size() != K || covs.size() != K) {
      throw DataError("model file: component arrays have the wrong length");
    }
    std::vector<ComponentParams> components;
    for (std::size_t k = 0; k < K; ++k) {
      components.emplace_back(vector_from(means[k], d), matrix_from(covs[k], d));
    }
    return MixtureModel(family, std::move(weights), std::move(components));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model file: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
}

void save_model(const MixtureModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write model file " + path.string());
  save_model(model, out);
}

MixtureModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file " + path.string());
  return load_model(in);
}

}  // namespace mbss
