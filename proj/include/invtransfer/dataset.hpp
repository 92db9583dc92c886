#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <Eigen/Core>
#include <json.hpp>

namespace invtransfer {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct DatasetProvenance {
  std::string problem_id;
  std::string generator;
  std::uint64_t seed = 0;
};

/// Paired preference vectors (rows of w) and decision vectors (rows of x).
/// Constructed instances always satisfy validate().
class InverseDataset {
public:
  static constexpr int kVersion = 1;

  InverseDataset() = default;
  /// Throws ValidationError when a row violates the simplex or bound invariants.
  InverseDataset(MatrixXd w, MatrixXd x, VectorXd lower, VectorXd upper, DatasetProvenance provenance,
                 bool nondominated);

  int m() const { return static_cast<int>(w_.cols()); }
  int d() const { return static_cast<int>(x_.cols()); }
  Eigen::Index size() const { return w_.rows(); }
  const MatrixXd& w() const { return w_; }
  const MatrixXd& x() const { return x_; }
  VectorXd column(int j) const { return x_.col(j); }
  const VectorXd& lower() const { return lower_; }
  const VectorXd& upper() const { return upper_; }
  const DatasetProvenance& provenance() const { return provenance_; }
  /// Rows were mutually nondominated when generated.
  bool nondominated() const { return nondominated_; }

private:
  void validate() const;

  MatrixXd w_;
  MatrixXd x_;
  VectorXd lower_;
  VectorXd upper_;
  DatasetProvenance provenance_;
  bool nondominated_ = false;
};

nlohmann::json dataset_to_json(const InverseDataset& dataset);
InverseDataset dataset_from_json(const nlohmann::json& j);

/// Pretty-printed JSON; identical datasets serialize to identical bytes.
std::string serialize_dataset(const InverseDataset& dataset);
/// Throws ParseError (with line number) on malformed text, ValidationError on
/// invariant violations.
InverseDataset parse_dataset(const std::string& text);

void save_dataset(const InverseDataset& dataset, const std::filesystem::path& path);
InverseDataset load_dataset(const std::filesystem::path& path);

} // namespace invtransfer
