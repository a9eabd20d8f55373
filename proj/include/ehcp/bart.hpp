#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ehcp/features.hpp"

namespace ehcp {

/// Node of a stored tree. Internal nodes route left iff x[var] < cut.
struct TreeNode {
  int var = -1;  // -1 for a leaf
  double cut = 0.0;
  double value = 0.0;  // leaf value
  int left = -1;
  int right = -1;

  bool is_leaf() const { return var < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Binary tree as a node list with explicit child indices; nodes[0] is the root.
struct DecisionTree {
  std::vector<TreeNode> nodes{TreeNode{}};

  double evaluate(std::span<const double> x) const;
  int depth() const;
  std::size_t leaf_count() const;
  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

struct TreeEnsembleDraw {
  std::vector<DecisionTree> trees;
  std::vector<double> split_probs;  // simplex over variables
  double dirichlet_alpha = 1.0;

  double evaluate(std::span<const double> x) const;
  friend bool operator==(const TreeEnsembleDraw&, const TreeEnsembleDraw&) = default;
};

struct BartConfig {
  int num_trees = 200;
  int draws = 1000;  // kept per chain
  int burn_in = 1000;
  int thin = 1;
  int chains = 1;
  double depth_alpha = 0.95;
  double depth_beta = 2.0;
  int max_depth = 100;
  /// Prior sd of f(x) on the logit scale; leaf sd is this over sqrt(num_trees).
  double prior_f_sd = 3.0;
  /// Dirichlet(alpha/p, ..., alpha/p) prior on splitting probabilities.
  bool sparse = true;
  double dirichlet_alpha = 1.0;
  bool dirichlet_hyperprior = false;
  double p_grow = 0.25;
  double p_prune = 0.25;
  double p_change = 0.50;
  int num_cutpoints = 100;
  std::uint64_t seed = 1;

  double leaf_sd() const;
  void validate() const;
};

struct BartPosterior {
  std::vector<TreeEnsembleDraw> draws;
  std::vector<std::string> names;  // design columns
  StandardizationParams standardization;
  BartConfig config;
  double grow_acceptance = 0.0;
  double prune_acceptance = 0.0;
  double change_acceptance = 0.0;

  std::size_t draw_count() const { return draws.size(); }
};

/// Cutpoint grid per column: midpoints between adjacent distinct values,
/// thinned to at most `max_cuts` at quantile positions.
std::vector<std::vector<double>> cutpoint_grid(const Eigen::MatrixXd& x, int max_cuts);

/// Backfitting MCMC for logit BART. Binary outcomes enter through exact
/// Pólya-Gamma augmentation; splitting probabilities get a Dirichlet update.
BartPosterior fit_bart(const DesignMatrix& standardized, std::span<const int> y,
                       const BartConfig& config, StandardizationParams standardization = {});

std::vector<double> predict_bart_standardized(const BartPosterior& post, const Eigen::VectorXd& z);
std::vector<double> predict_bart(const BartPosterior& post, const std::map<std::string, double>& raw);

struct VariableImportance {
  std::string name;
  double split_probability = 0.0;
};

/// Posterior mean splitting probability per design column, largest first.
std::vector<VariableImportance> splitting_importance(const BartPosterior& post);

}  // namespace ehcp
