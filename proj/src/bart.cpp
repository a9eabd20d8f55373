#include "ehcp/bart.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <numeric>
#include <set>

#include "ehcp/diagnostics.hpp"
#include "ehcp/random.hpp"

namespace ehcp {

double DecisionTree::evaluate(std::span<const double> x) const {
  int i = 0;
  while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
    const TreeNode& n = nodes[static_cast<std::size_t>(i)];
    i = x[static_cast<std::size_t>(n.var)] < n.cut ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(i)].value;
}

int DecisionTree::depth() const {
  int best = 0;
  std::vector<std::pair<int, int>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    const TreeNode& n = nodes[static_cast<std::size_t>(i)];
    if (!n.is_leaf()) {
      stack.push_back({n.left, d + 1});
      stack.push_back({n.right, d + 1});
    }
  }
  return best;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

double TreeEnsembleDraw::evaluate(std::span<const double> x) const {
  double f = 0.0;
  for (const auto& t : trees) f += t.evaluate(x);
  return f;
}

double BartConfig::leaf_sd() const { return prior_f_sd / std::sqrt(static_cast<double>(num_trees)); }

void BartConfig::validate() const {
  if (num_trees < 1) throw InputError("num_trees must be at least 1");
  if (draws < 1 || burn_in < 0 || thin < 1 || chains < 1) {
    throw InputError("draws >= 1, burn_in >= 0, thin >= 1 and chains >= 1 are required");
  }
  if (std::fabs(p_grow + p_prune + p_change - 1.0) > 1e-12 || p_grow <= 0 || p_prune <= 0 ||
      p_change < 0) {
    throw InputError("move probabilities must be positive and sum to 1");
  }
  if (!(depth_alpha > 0.0 && depth_alpha < 1.0) || depth_beta < 0.0) {
    throw InputError("depth prior needs 0 < alpha < 1 and beta >= 0");
  }
  if (prior_f_sd <= 0.0 || dirichlet_alpha <= 0.0 || num_cutpoints < 1 || max_depth < 0) {
    throw InputError("prior scales, concentration, cutpoint count and max depth must be positive");
  }
}

std::vector<std::vector<double>> cutpoint_grid(const Eigen::MatrixXd& x, int max_cuts) {
  std::vector<std::vector<double>> grid(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    std::vector<double> col(x.col(j).data(), x.col(j).data() + x.rows());
    std::vector<double> uniq = col;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    auto& cuts = grid[static_cast<std::size_t>(j)];
    if (uniq.size() < 2) continue;
    auto midpoint = [&](std::size_t k) { return 0.5 * (uniq[k] + uniq[k + 1]); };
    if (uniq.size() - 1 <= static_cast<std::size_t>(max_cuts)) {
      for (std::size_t k = 0; k + 1 < uniq.size(); ++k) cuts.push_back(midpoint(k));
      continue;
    }
    std::set<double> chosen;
    for (int k = 1; k <= max_cuts; ++k) {
      const double v = quantile(col, static_cast<double>(k) / (max_cuts + 1));
      auto it = std::upper_bound(uniq.begin(), uniq.end(), v);
      std::size_t idx = static_cast<std::size_t>(it - uniq.begin());
      idx = idx == 0 ? 0 : idx - 1;
      idx = std::min(idx, uniq.size() - 2);
      chosen.insert(midpoint(idx));
    }
    cuts.assign(chosen.begin(), chosen.end());
  }
  return grid;
}

namespace {

struct WorkNode {
  int var = -1;
  int cut = 0;  // index into the variable's cutpoint grid
  double value = 0.0;
  int left = -1;
  int right = -1;
  int parent = -1;
  int depth = 0;
  bool alive = true;

  bool leaf() const { return var < 0; }
};

struct WorkTree {
  std::vector<WorkNode> nodes{WorkNode{}};
  std::vector<int> free_list;

  int add(WorkNode n) {
    if (!free_list.empty()) {
      const int i = free_list.back();
      free_list.pop_back();
      nodes[static_cast<std::size_t>(i)] = n;
      return i;
    }
    nodes.push_back(n);
    return static_cast<int>(nodes.size()) - 1;
  }
  void remove(int i) {
    nodes[static_cast<std::size_t>(i)].alive = false;
    free_list.push_back(i);
  }
  WorkNode& at(int i) { return nodes[static_cast<std::size_t>(i)]; }
  const WorkNode& at(int i) const { return nodes[static_cast<std::size_t>(i)]; }

  bool is_nog(int i) const {
    const WorkNode& n = at(i);
    return n.alive && !n.leaf() && at(n.left).leaf() && at(n.right).leaf();
  }
  int sibling(int i) const {
    const WorkNode& p = at(at(i).parent);
    return p.left == i ? p.right : p.left;
  }
};

struct LeafStats {
  double w = 0.0;  // sum of weights
  double s = 0.0;  // weighted residual sum
};

struct ChainResult {
  std::vector<TreeEnsembleDraw> draws;
  std::array<long, 3> proposed{};
  std::array<long, 3> accepted{};
};

enum Move { kGrow = 0, kPrune = 1, kChange = 2 };

class ChainSampler {
 public:
  ChainSampler(const Eigen::MatrixXd& x, std::span<const int> y, const BartConfig& cfg,
               const std::vector<std::vector<double>>& cuts, std::uint64_t seed)
      : x_(x), y_(y), cfg_(cfg), cuts_(cuts), rng_(seed),
        n_(static_cast<std::size_t>(x.rows())), p_(static_cast<std::size_t>(x.cols())),
        tau2_(cfg.leaf_sd() * cfg.leaf_sd()) {
    bins_.assign(p_, std::vector<std::uint16_t>(n_));
    for (std::size_t j = 0; j < p_; ++j) {
      const auto& c = cuts_[j];
      for (std::size_t i = 0; i < n_; ++i) {
        const double v = x_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        bins_[j][i] = static_cast<std::uint16_t>(std::upper_bound(c.begin(), c.end(), v) - c.begin());
      }
    }
    trees_.assign(static_cast<std::size_t>(cfg.num_trees), WorkTree{});
    leaf_of_.assign(trees_.size(), std::vector<int>(n_, 0));
    fit_.assign(n_, 0.0);
    z_.assign(n_, 0.0);
    omega_.assign(n_, 0.0);
    resid_.assign(n_, 0.0);
    alpha_dir_ = cfg.dirichlet_alpha;
    log_s_.assign(p_, -std::log(static_cast<double>(p_)));
    refresh_cumulative();
  }

  ChainResult run() {
    ChainResult out;
    const int total = cfg_.burn_in + cfg_.draws * cfg_.thin;
    for (int it = 0; it < total; ++it) {
      for (std::size_t i = 0; i < n_; ++i) {
        omega_[i] = rng_.polya_gamma(fit_[i]);
        z_[i] = (y_[i] - 0.5) / omega_[i];
      }
      for (std::size_t t = 0; t < trees_.size(); ++t) update_tree(t, out);
      if (cfg_.sparse) update_split_probs();
      if (it >= cfg_.burn_in && (it - cfg_.burn_in) % cfg_.thin == cfg_.thin - 1) {
        out.draws.push_back(export_draw());
      }
    }
    return out;
  }

 private:
  double log_split_prior(int depth) const {
    if (depth >= cfg_.max_depth) return -INFINITY;
    return std::log(cfg_.depth_alpha) - cfg_.depth_beta * std::log1p(static_cast<double>(depth));
  }
  double log_no_split_prior(int depth) const {
    if (depth >= cfg_.max_depth) return 0.0;
    return std::log1p(-cfg_.depth_alpha * std::pow(1.0 + depth, -cfg_.depth_beta));
  }
  // Integrated Gaussian likelihood of a leaf, up to partition-free constants.
  double leaf_loglik(const LeafStats& st) const {
    const double a = 1.0 + tau2_ * st.w;
    return -0.5 * std::log(a) + 0.5 * tau2_ * st.s * st.s / a;
  }
  // Probability of choosing `move` in a tree with these counts.
  double move_prob(Move move, std::size_t growable, std::size_t nog, std::size_t internal) const {
    const std::array<double, 3> base = {growable > 0 ? cfg_.p_grow : 0.0,
                                        nog > 0 ? cfg_.p_prune : 0.0,
                                        internal > 0 ? cfg_.p_change : 0.0};
    const double total = base[0] + base[1] + base[2];
    return total > 0.0 ? base[move] / total : 0.0;
  }

  bool goes_left(std::size_t i, int var, int cut) const {
    return bins_[static_cast<std::size_t>(var)][i] <= cut;
  }

  void refresh_cumulative() {
    cumulative_.resize(p_);
    double acc = 0.0;
    for (std::size_t j = 0; j < p_; ++j) {
      acc += std::exp(log_s_[j]);
      cumulative_[j] = acc;
    }
  }

  int draw_variable() { return static_cast<int>(rng_.from_cumulative(cumulative_)); }
  int draw_cut(int var) {
    return static_cast<int>(rng_.index(cuts_[static_cast<std::size_t>(var)].size()));
  }

  void update_tree(std::size_t t, ChainResult& out) {
    WorkTree& tree = trees_[t];
    auto& leaf_of = leaf_of_[t];
    for (std::size_t i = 0; i < n_; ++i) {
      resid_[i] = z_[i] - fit_[i] + tree.at(leaf_of[i]).value;
    }

    std::vector<int> growable, nogs, internal;
    for (int k = 0; k < static_cast<int>(tree.nodes.size()); ++k) {
      const WorkNode& nd = tree.at(k);
      if (!nd.alive) continue;
      if (nd.leaf()) {
        if (nd.depth < cfg_.max_depth) growable.push_back(k);
      } else {
        internal.push_back(k);
        if (tree.is_nog(k)) nogs.push_back(k);
      }
    }
    const double pg = move_prob(kGrow, growable.size(), nogs.size(), internal.size());
    const double pp = move_prob(kPrune, growable.size(), nogs.size(), internal.size());
    const double u = rng_.uniform();
    if (growable.empty() && internal.empty()) {
      // nothing to propose
    } else if (u < pg) {
      propose_grow(tree, leaf_of, growable, nogs.size(), internal.size(), out);
    } else if (u < pg + pp) {
      propose_prune(tree, leaf_of, growable.size(), nogs, internal.size(), out);
    } else {
      propose_change(tree, leaf_of, internal, out);
    }

    // leaf values from their Gaussian full conditionals
    std::vector<LeafStats> stats(tree.nodes.size());
    for (std::size_t i = 0; i < n_; ++i) {
      LeafStats& st = stats[static_cast<std::size_t>(leaf_of[i])];
      st.w += omega_[i];
      st.s += omega_[i] * resid_[i];
    }
    for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
      WorkNode& nd = tree.nodes[k];
      if (!nd.alive || !nd.leaf()) continue;
      const double precision = stats[k].w + 1.0 / tau2_;
      nd.value = stats[k].s / precision + rng_.normal() / std::sqrt(precision);
    }
    for (std::size_t i = 0; i < n_; ++i) {
      fit_[i] = z_[i] - resid_[i] + tree.at(leaf_of[i]).value;
    }
  }

  void propose_grow(WorkTree& tree, std::vector<int>& leaf_of, const std::vector<int>& growable,
                    std::size_t nog_count, std::size_t internal_count, ChainResult& out) {
    ++out.proposed[kGrow];
    const int leaf = growable[rng_.index(growable.size())];
    const int var = draw_variable();
    const int cut = draw_cut(var);
    const int depth = tree.at(leaf).depth;

    LeafStats left, right;
    for (std::size_t i = 0; i < n_; ++i) {
      if (leaf_of[i] != leaf) continue;
      LeafStats& st = goes_left(i, var, cut) ? left : right;
      st.w += omega_[i];
      st.s += omega_[i] * resid_[i];
    }
    const LeafStats merged{left.w + right.w, left.s + right.s};

    const bool parent_was_nog = tree.at(leaf).parent >= 0 && tree.at(tree.sibling(leaf)).leaf();
    const std::size_t nog_after = nog_count + 1 - (parent_was_nog ? 1 : 0);
    const std::size_t growable_after =
        growable.size() - 1 + (depth + 1 < cfg_.max_depth ? 2 : 0);
    const double p_grow_before = move_prob(kGrow, growable.size(), nog_count, internal_count);
    const double p_prune_after = move_prob(kPrune, growable_after, nog_after, internal_count + 1);

    const double log_ratio = leaf_loglik(left) + leaf_loglik(right) - leaf_loglik(merged) +
                             log_split_prior(depth) + 2.0 * log_no_split_prior(depth + 1) -
                             log_no_split_prior(depth) + std::log(p_prune_after) -
                             std::log(static_cast<double>(nog_after)) - std::log(p_grow_before) +
                             std::log(static_cast<double>(growable.size()));
    if (std::log(rng_.uniform()) >= log_ratio) return;

    ++out.accepted[kGrow];
    WorkNode child;
    child.parent = leaf;
    child.depth = depth + 1;
    const int l = tree.add(child);
    const int r = tree.add(child);
    WorkNode& nd = tree.at(leaf);
    nd.var = var;
    nd.cut = cut;
    nd.left = l;
    nd.right = r;
    for (std::size_t i = 0; i < n_; ++i) {
      if (leaf_of[i] == leaf) leaf_of[i] = goes_left(i, var, cut) ? l : r;
    }
  }

  void propose_prune(WorkTree& tree, std::vector<int>& leaf_of, std::size_t growable_count,
                     const std::vector<int>& nogs, std::size_t internal_count, ChainResult& out) {
    ++out.proposed[kPrune];
    const int node = nogs[rng_.index(nogs.size())];
    const WorkNode& nd = tree.at(node);
    const int depth = nd.depth;
    LeafStats left, right;
    for (std::size_t i = 0; i < n_; ++i) {
      LeafStats* st = leaf_of[i] == nd.left ? &left : (leaf_of[i] == nd.right ? &right : nullptr);
      if (!st) continue;
      st->w += omega_[i];
      st->s += omega_[i] * resid_[i];
    }
    const LeafStats merged{left.w + right.w, left.s + right.s};

    const std::size_t growable_after =
        growable_count - (depth + 1 < cfg_.max_depth ? 2 : 0) + 1;
    const bool parent_becomes_nog = nd.parent >= 0 && tree.at(tree.sibling(node)).leaf();
    const std::size_t nog_after = nogs.size() - 1 + (parent_becomes_nog ? 1 : 0);
    const double p_prune_before = move_prob(kPrune, growable_count, nogs.size(), internal_count);
    const double p_grow_after = move_prob(kGrow, growable_after, nog_after, internal_count - 1);

    const double log_ratio = leaf_loglik(merged) - leaf_loglik(left) - leaf_loglik(right) -
                             (log_split_prior(depth) + 2.0 * log_no_split_prior(depth + 1) -
                              log_no_split_prior(depth)) +
                             std::log(p_grow_after) - std::log(static_cast<double>(growable_after)) -
                             std::log(p_prune_before) + std::log(static_cast<double>(nogs.size()));
    if (std::log(rng_.uniform()) >= log_ratio) return;

    ++out.accepted[kPrune];
    const int l = nd.left, r = nd.right;
    for (std::size_t i = 0; i < n_; ++i) {
      if (leaf_of[i] == l || leaf_of[i] == r) leaf_of[i] = node;
    }
    tree.remove(l);
    tree.remove(r);
    WorkNode& keep = tree.at(node);
    keep.var = -1;
    keep.left = keep.right = -1;
  }

  void propose_change(WorkTree& tree, std::vector<int>& leaf_of, const std::vector<int>& internal,
                      ChainResult& out) {
    ++out.proposed[kChange];
    const int node = internal[rng_.index(internal.size())];
    const int var = draw_variable();
    const int cut = draw_cut(var);

    std::vector<char> in_subtree(tree.nodes.size(), 0);
    {
      std::vector<int> stack{node};
      while (!stack.empty()) {
        const int k = stack.back();
        stack.pop_back();
        in_subtree[static_cast<std::size_t>(k)] = 1;
        const WorkNode& nd = tree.at(k);
        if (!nd.leaf()) {
          stack.push_back(nd.left);
          stack.push_back(nd.right);
        }
      }
    }
    std::vector<LeafStats> old_stats(tree.nodes.size()), new_stats(tree.nodes.size());
    std::vector<std::pair<std::size_t, int>> moved;
    for (std::size_t i = 0; i < n_; ++i) {
      const int current = leaf_of[i];
      if (!in_subtree[static_cast<std::size_t>(current)]) continue;
      int k = node;
      bool first = true;
      while (!tree.at(k).leaf()) {
        const WorkNode& nd = tree.at(k);
        const bool left = first ? goes_left(i, var, cut) : goes_left(i, nd.var, nd.cut);
        k = left ? nd.left : nd.right;
        first = false;
      }
      LeafStats& o = old_stats[static_cast<std::size_t>(current)];
      o.w += omega_[i];
      o.s += omega_[i] * resid_[i];
      LeafStats& nw = new_stats[static_cast<std::size_t>(k)];
      nw.w += omega_[i];
      nw.s += omega_[i] * resid_[i];
      moved.emplace_back(i, k);
    }
    double log_ratio = 0.0;
    for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
      if (!in_subtree[k] || !tree.nodes[k].leaf()) continue;
      log_ratio += leaf_loglik(new_stats[k]) - leaf_loglik(old_stats[k]);
    }
    if (std::log(rng_.uniform()) >= log_ratio) return;

    ++out.accepted[kChange];
    tree.at(node).var = var;
    tree.at(node).cut = cut;
    for (const auto& [i, k] : moved) leaf_of[i] = k;
  }

  void update_split_probs() {
    std::vector<double> shape(p_, alpha_dir_ / static_cast<double>(p_));
    for (const auto& tree : trees_) {
      for (const auto& nd : tree.nodes) {
        if (nd.alive && !nd.leaf()) shape[static_cast<std::size_t>(nd.var)] += 1.0;
      }
    }
    log_s_ = log_dirichlet(shape, rng_);
    if (cfg_.dirichlet_hyperprior) update_alpha();
    refresh_cumulative();
  }

  // Griddy Gibbs on lambda = alpha / (alpha + p) with a Beta(0.5, 1) prior.
  void update_alpha() {
    constexpr int kGrid = 1000;
    const double p = static_cast<double>(p_);
    double sum_log_s = 0.0;
    for (double v : log_s_) sum_log_s += v;
    std::vector<double> logw(kGrid), alphas(kGrid);
    double max_w = -INFINITY;
    for (int g = 0; g < kGrid; ++g) {
      const double lambda = (g + 0.5) / kGrid;
      const double a = lambda * p / (1.0 - lambda);
      alphas[static_cast<std::size_t>(g)] = a;
      const double lw = std::lgamma(a) - p * std::lgamma(a / p) + (a / p) * sum_log_s -
                        0.5 * std::log(lambda);
      logw[static_cast<std::size_t>(g)] = lw;
      max_w = std::max(max_w, lw);
    }
    std::vector<double> cum(kGrid);
    double acc = 0.0;
    for (int g = 0; g < kGrid; ++g) {
      acc += std::exp(logw[static_cast<std::size_t>(g)] - max_w);
      cum[static_cast<std::size_t>(g)] = acc;
    }
    alpha_dir_ = alphas[rng_.from_cumulative(cum)];
  }

  TreeEnsembleDraw export_draw() const {
    TreeEnsembleDraw d;
    d.dirichlet_alpha = alpha_dir_;
    d.split_probs.resize(p_);
    double total = 0.0;
    for (std::size_t j = 0; j < p_; ++j) total += std::exp(log_s_[j]);
    for (std::size_t j = 0; j < p_; ++j) d.split_probs[j] = std::exp(log_s_[j]) / total;
    for (const auto& tree : trees_) {
      DecisionTree out;
      out.nodes.clear();
      // preorder; children get their indices when first visited
      std::vector<std::pair<int, int>> stack{{0, -1}};
      while (!stack.empty()) {
        auto [k, parent_slot] = stack.back();
        stack.pop_back();
        const int idx = static_cast<int>(out.nodes.size());
        if (parent_slot >= 0) {
          TreeNode& parent = out.nodes[static_cast<std::size_t>(parent_slot / 2)];
          (parent_slot % 2 == 0 ? parent.left : parent.right) = idx;
        }
        const WorkNode& nd = tree.at(k);
        TreeNode tn;
        if (nd.leaf()) {
          tn.value = nd.value;
        } else {
          tn.var = nd.var;
          tn.cut = cuts_[static_cast<std::size_t>(nd.var)][static_cast<std::size_t>(nd.cut)];
        }
        out.nodes.push_back(tn);
        if (!nd.leaf()) {
          stack.push_back({nd.right, idx * 2 + 1});
          stack.push_back({nd.left, idx * 2});
        }
      }
      d.trees.push_back(std::move(out));
    }
    return d;
  }

  const Eigen::MatrixXd& x_;
  std::span<const int> y_;
  const BartConfig& cfg_;
  const std::vector<std::vector<double>>& cuts_;
  Rng rng_;
  std::size_t n_;
  std::size_t p_;
  double tau2_;
  std::vector<std::vector<std::uint16_t>> bins_;
  std::vector<WorkTree> trees_;
  std::vector<std::vector<int>> leaf_of_;
  std::vector<double> fit_, z_, omega_, resid_;
  std::vector<double> log_s_, cumulative_;
  double alpha_dir_ = 1.0;
};

}  // namespace

BartPosterior fit_bart(const DesignMatrix& standardized, std::span<const int> y,
                       const BartConfig& config, StandardizationParams standardization) {
  config.validate();
  const auto& x = standardized.values;
  if (x.cols() == 0) throw InputError("refusing to fit BART with no covariates");
  if (static_cast<std::size_t>(x.rows()) != y.size()) throw InputError("X and y row counts differ");
  if (x.rows() == 0) throw InputError("refusing to fit BART with no rows");
  if (config.num_cutpoints > 65535) throw InputError("num_cutpoints too large");
  bool any0 = false, any1 = false;
  for (int v : y) {
    if (v != 0 && v != 1) throw InputError("outcomes must be 0/1");
    (v ? any1 : any0) = true;
  }
  if (!(any0 && any1)) throw InputError("refusing to fit BART to a constant outcome");

  const auto cuts = cutpoint_grid(x, config.num_cutpoints);
  for (std::size_t j = 0; j < cuts.size(); ++j) {
    if (cuts[j].empty()) {
      throw InputError("column " + standardized.columns[j].name + " is constant; drop it before fitting");
    }
  }

  std::vector<std::future<ChainResult>> futures;
  for (int c = 0; c < config.chains; ++c) {
    futures.push_back(std::async(std::launch::async, [&, c] {
      ChainSampler sampler(x, y, config, cuts, derive_seed(config.seed, static_cast<std::uint64_t>(c)));
      return sampler.run();
    }));
  }
  BartPosterior post;
  post.config = config;
  post.standardization = std::move(standardization);
  for (const auto& c : standardized.columns) post.names.push_back(c.name);
  std::array<long, 3> proposed{}, accepted{};
  for (auto& f : futures) {
    ChainResult r = f.get();
    for (auto& d : r.draws) post.draws.push_back(std::move(d));
    for (int m = 0; m < 3; ++m) {
      proposed[static_cast<std::size_t>(m)] += r.proposed[static_cast<std::size_t>(m)];
      accepted[static_cast<std::size_t>(m)] += r.accepted[static_cast<std::size_t>(m)];
    }
  }
  auto rate = [&](int m) {
    const auto k = static_cast<std::size_t>(m);
    return proposed[k] ? static_cast<double>(accepted[k]) / static_cast<double>(proposed[k]) : 0.0;
  };
  post.grow_acceptance = rate(kGrow);
  post.prune_acceptance = rate(kPrune);
  post.change_acceptance = rate(kChange);
  return post;
}

std::vector<double> predict_bart_standardized(const BartPosterior& post, const Eigen::VectorXd& z) {
  if (static_cast<std::size_t>(z.size()) != post.names.size()) {
    throw InputError("row width does not match the posterior");
  }
  std::span<const double> x(z.data(), static_cast<std::size_t>(z.size()));
  std::vector<double> out(post.draws.size());
  for (std::size_t s = 0; s < post.draws.size(); ++s) {
    out[s] = 1.0 / (1.0 + std::exp(-post.draws[s].evaluate(x)));
  }
  return out;
}

std::vector<double> predict_bart(const BartPosterior& post, const std::map<std::string, double>& raw) {
  return predict_bart_standardized(post, standardize_apply(post.standardization, raw));
}

std::vector<VariableImportance> splitting_importance(const BartPosterior& post) {
  std::vector<VariableImportance> out;
  for (const auto& n : post.names) out.push_back({n, 0.0});
  if (post.draws.empty()) return out;
  for (std::size_t j = 0; j < out.size(); ++j) {
    std::vector<double> v;
    v.reserve(post.draws.size());
    for (const auto& d : post.draws) v.push_back(d.split_probs[j]);
    out[j].split_probability = stable_mean(v);
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.split_probability > b.split_probability;
  });
  return out;
}

}  // namespace ehcp
