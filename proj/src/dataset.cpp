#include "invtransfer/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "invtransfer/errors.hpp"
#include "invtransfer/gp.hpp"

namespace invtransfer {

namespace {

constexpr const char* kFormat = "invtransfer.dataset";
constexpr double kSimplexTol = 1e-6;

} // namespace

InverseDataset::InverseDataset(MatrixXd w, MatrixXd x, VectorXd lower, VectorXd upper, DatasetProvenance provenance,
                               bool nondominated)
    : w_(std::move(w)), x_(std::move(x)), lower_(std::move(lower)), upper_(std::move(upper)),
      provenance_(std::move(provenance)), nondominated_(nondominated)
{
  validate();
}

void InverseDataset::validate() const
{
  if (w_.rows() != x_.rows())
    throw ValidationError("dataset: " + std::to_string(w_.rows()) + " preference rows but " +
                          std::to_string(x_.rows()) + " solution rows");
  if (lower_.size() != x_.cols() || upper_.size() != x_.cols())
    throw ValidationError("dataset: bounds length does not match d");
  if (w_.rows() > 0 && w_.cols() < 2)
    throw ValidationError("dataset: need m >= 2");
  std::ostringstream bad;
  int count = 0;
  for (Eigen::Index i = 0; i < w_.rows(); ++i) {
    std::string reason;
    if (!w_.row(i).allFinite() || w_.row(i).minCoeff() < -kSimplexTol || std::abs(w_.row(i).sum() - 1.0) > kSimplexTol)
      reason = "w not on the simplex";
    else if (!x_.row(i).allFinite() || (x_.row(i).transpose().array() < lower_.array()).any() ||
             (x_.row(i).transpose().array() > upper_.array()).any())
      reason = "x outside bounds";
    if (!reason.empty()) {
      if (count < 10)
        bad << (count ? "; " : "") << "row " << i << ": " << reason;
      ++count;
    }
  }
  if (count > 0)
    throw ValidationError("dataset: " + std::to_string(count) + " invalid row(s): " + bad.str());
}

nlohmann::json dataset_to_json(const InverseDataset& dataset)
{
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < dataset.size(); ++i)
    rows.push_back({{"w", vector_to_json(dataset.w().row(i).transpose())},
                    {"x", vector_to_json(dataset.x().row(i).transpose())}});
  return nlohmann::json{{"format", kFormat},
                        {"version", InverseDataset::kVersion},
                        {"m", dataset.m()},
                        {"d", dataset.d()},
                        {"provenance",
                         {{"problem_id", dataset.provenance().problem_id},
                          {"generator", dataset.provenance().generator},
                          {"seed", dataset.provenance().seed}}},
                        {"nondominated", dataset.nondominated()},
                        {"lower", vector_to_json(dataset.lower())},
                        {"upper", vector_to_json(dataset.upper())},
                        {"rows", std::move(rows)}};
}

InverseDataset dataset_from_json(const nlohmann::json& j)
{
  try {
    if (j.value("format", std::string()) != kFormat)
      throw ParseError("dataset: missing or wrong \"format\" tag (expected \"" + std::string(kFormat) + "\")");
    const int version = j.at("version").get<int>();
    if (version != InverseDataset::kVersion)
      throw ParseError("dataset: unsupported version " + std::to_string(version) + " (this build reads version " +
                       std::to_string(InverseDataset::kVersion) + ")");
    const int m = j.at("m").get<int>();
    const int d = j.at("d").get<int>();
    const nlohmann::json& rows = j.at("rows");
    MatrixXd w(rows.size(), m);
    MatrixXd x(rows.size(), d);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const VectorXd wi = vector_from_json(rows[i].at("w"));
      const VectorXd xi = vector_from_json(rows[i].at("x"));
      if (wi.size() != m || xi.size() != d)
        throw ValidationError("dataset: row " + std::to_string(i) + " has the wrong length");
      w.row(i) = wi.transpose();
      x.row(i) = xi.transpose();
    }
    const nlohmann::json& p = j.at("provenance");
    DatasetProvenance provenance{p.at("problem_id").get<std::string>(), p.at("generator").get<std::string>(),
                                 p.at("seed").get<std::uint64_t>()};
    return InverseDataset(std::move(w), std::move(x), vector_from_json(j.at("lower")),
                          vector_from_json(j.at("upper")), std::move(provenance), j.at("nondominated").get<bool>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("dataset: ") + e.what());
  }
}

std::string serialize_dataset(const InverseDataset& dataset) { return dataset_to_json(dataset).dump(2) + "\n"; }

InverseDataset parse_dataset(const std::string& text)
{
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const long line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw ParseError("dataset: malformed JSON at line " + std::to_string(line) + ": " + e.what());
  }
  return dataset_from_json(j);
}

void save_dataset(const InverseDataset& dataset, const std::filesystem::path& path)
{
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("cannot open " + path.string() + " for writing");
  out << serialize_dataset(dataset);
  if (!out)
    throw Error("failed writing " + path.string());
}

InverseDataset load_dataset(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("cannot open dataset " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_dataset(buffer.str());
}

} // namespace invtransfer
