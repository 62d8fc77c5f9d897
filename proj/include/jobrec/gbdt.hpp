#pragma once

#include <optional>
#include <string>
#include <vector>

#include "jobrec/features.hpp"

namespace jobrec::gbdt {

struct TrainConfig {
  int max_depth = 5;
  double min_child_weight = 5.0;  // minimum hessian sum per child
  double eta = 0.1;
  double gamma = 1.0;  // minimum loss reduction to split
  int num_round = 1000;
  double lambda = 1.0;  // L2 on leaf weights
  std::uint64_t seed = 0;
  std::optional<int> early_stopping_rounds;
  // Overrides the log-odds-of-prior starting margin when set.
  std::optional<double> base_margin;

  void validate() const;
};

// Per-example logloss derivatives with respect to the margin.
struct GradientPair {
  double grad = 0;
  double hess = 0;
};

double sigmoid(double margin);
double logloss(double margin, int label);
GradientPair logloss_gradient(double margin, int label);
double mean_logloss(std::span<const double> margins, std::span<const std::uint8_t> labels);

struct TreeNode {
  // Internal nodes: rows with value < threshold go left.
  int feature = -1;
  double threshold = 0;
  int left = -1;
  int right = -1;
  // Leaves: eta-scaled weight added to the margin.
  double value = 0;
  // Training statistics.
  double grad_sum = 0;
  double hess_sum = 0;
  double gain = 0;

  bool is_leaf() const { return feature < 0; }
};

class RegressionTree {
 public:
  RegressionTree() = default;
  explicit RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  double predict(std::span<const double> row) const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  int depth() const;
  std::size_t leaf_count() const;

 private:
  std::vector<TreeNode> nodes_;
};

class GbdtModel {
 public:
  GbdtModel() = default;
  GbdtModel(FeatureSchema schema, TrainConfig config, double base_margin, std::vector<RegressionTree> trees);

  double margin(std::span<const double> row) const;
  double predict(std::span<const double> row) const { return sigmoid(margin(row)); }
  std::vector<double> predict_proba(const FeatureMatrix& matrix) const;

  const FeatureSchema& schema() const { return schema_; }
  const TrainConfig& config() const { return config_; }
  double base_margin() const { return base_margin_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }

  // Split count per feature, in schema order.
  std::vector<std::size_t> feature_importance() const;

  // Per-round logloss recorded during training.
  std::vector<double> train_logloss;
  std::vector<double> valid_logloss;
  int best_round = -1;

 private:
  FeatureSchema schema_;
  TrainConfig config_;
  double base_margin_ = 0;
  std::vector<RegressionTree> trees_;
};

GbdtModel train(const FeatureMatrix& train_set, const FeatureMatrix* valid_set, const TrainConfig& config);

inline constexpr int kModelFormatVersion = 1;

void save_model(const GbdtModel& model, const std::string& path, const std::vector<std::string>& provenance = {});
GbdtModel load_model(const std::string& path, std::vector<std::string>* provenance = nullptr);
std::string serialize_model(const GbdtModel& model, const std::vector<std::string>& provenance = {});
GbdtModel deserialize_model(const std::string& text, std::vector<std::string>* provenance = nullptr);

struct ImportanceRow {
  std::string feature;
  std::string group;
  std::string subgroup;
  std::size_t count = 0;
};

// Per-feature split counts plus group and subgroup totals, groups in schema order.
struct ImportanceReport {
  std::vector<ImportanceRow> features;
  std::vector<ImportanceRow> groups;     // feature field empty
  std::vector<ImportanceRow> subgroups;  // feature field empty
};

ImportanceReport importance_report(const GbdtModel& model);
void write_importance(const ImportanceReport& report, const std::string& path);

}  // namespace jobrec::gbdt
