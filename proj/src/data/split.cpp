#include "ssorl/data/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ssorl/common/random.hpp"

namespace ssorl::data {

std::vector<std::size_t> return_order(const Dataset& dataset) {
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  const auto& trajs = dataset.trajectories;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ra = trajs[a].meta.total_return, rb = trajs[b].meta.total_return;
    return ra != rb ? ra < rb : a < b;
  });
  return order;
}

double return_percentile(const Dataset& dataset, double q) {
  if (dataset.empty()) throw std::invalid_argument("return_percentile: empty dataset");
  if (!(q > 0.0 && q <= 100.0)) throw std::invalid_argument("return_percentile: q must be in (0, 100]");
  const auto order = return_order(dataset);
  const double n = static_cast<double>(order.size());
  auto rank = static_cast<std::size_t>(std::ceil(q * n / 100.0 - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, order.size());
  return dataset.trajectories[order[rank - 1]].meta.total_return;
}

Dataset subset(const Dataset& dataset, std::span<const std::size_t> indices) {
  Dataset out = dataset.empty_like();
  out.trajectories.reserve(indices.size());
  for (std::size_t i : indices) out.trajectories.push_back(dataset.trajectories.at(i));
  return out;
}

Dataset strip_actions(const Dataset& dataset) {
  Dataset out = dataset;
  for (auto& t : out.trajectories) t.actions.reset();
  return out;
}

namespace {

SplitDataset assemble(const Dataset& dataset, std::vector<std::size_t> labelled, std::vector<std::size_t> unlabelled) {
  std::sort(labelled.begin(), labelled.end());
  std::sort(unlabelled.begin(), unlabelled.end());
  SplitDataset out;
  out.labelled = subset(dataset, labelled);
  for (const auto& t : out.labelled.trajectories) {
    if (!t.labelled()) throw std::invalid_argument("split: source trajectory lacks actions");
  }
  out.unlabelled = strip_actions(subset(dataset, unlabelled));
  out.labelled_indices = std::move(labelled);
  out.unlabelled_indices = std::move(unlabelled);
  return out;
}

}  // namespace

SplitDataset coupled_split(const Dataset& dataset, double q, double label_frac, std::uint64_t seed) {
  if (!(q > 0.0 && q <= 100.0)) throw std::invalid_argument("coupled_split: q must be in (0, 100]");
  if (!(label_frac > 0.0 && label_frac < 1.0)) throw std::invalid_argument("coupled_split: label_frac must be in (0, 1)");
  const std::size_t n = dataset.size();
  const double threshold = return_percentile(dataset, q);
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < n; ++i) {
    if (dataset.trajectories[i].meta.total_return <= threshold) pool.push_back(i);
  }
  const auto n_labelled = static_cast<std::size_t>(std::llround(label_frac * static_cast<double>(n)));
  if (n_labelled == 0) throw std::invalid_argument("coupled_split: round(label_frac * N) is zero");
  if (pool.size() < n_labelled) {
    throw std::invalid_argument("coupled_split: bottom-q pool has " + std::to_string(pool.size()) +
                                " trajectories, need " + std::to_string(n_labelled));
  }
  Rng rng(derive_seed(seed, 0x5e1171));
  std::vector<std::size_t> labelled;
  for (std::size_t j : rng.sample_without_replacement(pool.size(), n_labelled)) labelled.push_back(pool[j]);
  std::vector<bool> taken(n, false);
  for (std::size_t i : labelled) taken[i] = true;
  std::vector<std::size_t> unlabelled;
  for (std::size_t i = 0; i < n; ++i) {
    if (!taken[i]) unlabelled.push_back(i);
  }
  SplitDataset out = assemble(dataset, std::move(labelled), std::move(unlabelled));
  out.provenance = {{"protocol", "coupled"},
                    {"q", q},
                    {"label_frac", label_frac},
                    {"threshold", threshold},
                    {"pool_size", pool.size()},
                    {"n_labelled", out.labelled.size()},
                    {"n_unlabelled", out.unlabelled.size()},
                    {"seed", seed}};
  out.labelled.provenance["split"] = out.provenance;
  out.unlabelled.provenance["split"] = out.provenance;
  return out;
}

ReturnGroup parse_group(const std::string& name) {
  if (name == "low" || name == "Low") return ReturnGroup::kLow;
  if (name == "med" || name == "Med") return ReturnGroup::kMed;
  if (name == "high" || name == "High") return ReturnGroup::kHigh;
  throw std::invalid_argument("unknown return group '" + name + "'");
}

std::string group_name(ReturnGroup group) {
  switch (group) {
    case ReturnGroup::kLow: return "low";
    case ReturnGroup::kMed: return "med";
    case ReturnGroup::kHigh: return "high";
  }
  return "unknown";
}

std::array<std::vector<std::size_t>, 3> return_terciles(const Dataset& dataset) {
  const auto order = return_order(dataset);
  const double n = static_cast<double>(order.size());
  const auto c1 = static_cast<std::size_t>(std::llround(n / 3.0));
  const auto c2 = static_cast<std::size_t>(std::llround(2.0 * n / 3.0));
  std::array<std::vector<std::size_t>, 3> out;
  out[0].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(c1));
  out[1].assign(order.begin() + static_cast<std::ptrdiff_t>(c1), order.begin() + static_cast<std::ptrdiff_t>(c2));
  out[2].assign(order.begin() + static_cast<std::ptrdiff_t>(c2), order.end());
  for (auto& g : out) std::sort(g.begin(), g.end());
  return out;
}

SplitDataset decoupled_split(const Dataset& dataset, ReturnGroup labelled_group, std::size_t n_labelled,
                             ReturnGroup unlabelled_group, std::size_t n_unlabelled, std::uint64_t seed) {
  if (n_labelled == 0) throw std::invalid_argument("decoupled_split: n_labelled must be positive");
  const auto groups = return_terciles(dataset);
  const auto& lab_pool = groups[static_cast<std::size_t>(labelled_group)];
  const auto& unl_pool = groups[static_cast<std::size_t>(unlabelled_group)];
  Rng rng(derive_seed(seed, 0xdec0));
  std::vector<std::size_t> labelled, unlabelled;
  auto too_big = [](const std::string& what, std::size_t want, std::size_t have) {
    return std::invalid_argument("decoupled_split: requested " + std::to_string(want) + " " + what +
                                 " trajectories but the tercile holds " + std::to_string(have));
  };
  if (labelled_group == unlabelled_group) {
    if (n_labelled + n_unlabelled > lab_pool.size()) throw too_big("labelled+unlabelled", n_labelled + n_unlabelled, lab_pool.size());
    const auto draw = rng.sample_without_replacement(lab_pool.size(), n_labelled + n_unlabelled);
    for (std::size_t j = 0; j < draw.size(); ++j) (j < n_labelled ? labelled : unlabelled).push_back(lab_pool[draw[j]]);
  } else {
    if (n_labelled > lab_pool.size()) throw too_big("labelled", n_labelled, lab_pool.size());
    if (n_unlabelled > unl_pool.size()) throw too_big("unlabelled", n_unlabelled, unl_pool.size());
    for (std::size_t j : rng.sample_without_replacement(lab_pool.size(), n_labelled)) labelled.push_back(lab_pool[j]);
    for (std::size_t j : rng.sample_without_replacement(unl_pool.size(), n_unlabelled)) unlabelled.push_back(unl_pool[j]);
  }
  SplitDataset out = assemble(dataset, std::move(labelled), std::move(unlabelled));
  out.provenance = {{"protocol", "decoupled"},
                    {"labelled_group", group_name(labelled_group)},
                    {"unlabelled_group", group_name(unlabelled_group)},
                    {"n_labelled", n_labelled},
                    {"n_unlabelled", n_unlabelled},
                    {"seed", seed}};
  out.labelled.provenance["split"] = out.provenance;
  out.unlabelled.provenance["split"] = out.provenance;
  return out;
}

Dataset merge_with_proxy(const Dataset& labelled, const Dataset& proxy, std::uint64_t seed) {
  for (const auto* ds : {&labelled, &proxy}) {
    for (const auto& t : ds->trajectories) {
      if (!t.labelled()) throw std::invalid_argument("merge_with_proxy: action-free trajectory in input");
    }
  }
  if (!proxy.empty() && (proxy.state_dim != labelled.state_dim || proxy.action_dim != labelled.action_dim)) {
    throw std::invalid_argument("merge_with_proxy: dimension mismatch between inputs");
  }
  Dataset out = labelled.empty_like();
  out.trajectories.reserve(labelled.size() + proxy.size());
  for (const auto& t : labelled.trajectories) out.trajectories.push_back(t);
  for (const auto& t : proxy.trajectories) out.trajectories.push_back(t);
  Rng rng(derive_seed(seed, 0x3e76e));
  rng.shuffle(out.trajectories);
  out.provenance["merge"] = {{"n_labelled", labelled.size()}, {"n_proxy", proxy.size()}, {"seed", seed}};
  return out;
}

TrainValSplit train_val_split(std::size_t n, double val_frac, std::uint64_t seed) {
  const auto n_val = static_cast<std::size_t>(std::llround(val_frac * static_cast<double>(n)));
  if (n_val == 0 || n_val >= n) {
    throw std::invalid_argument("train_val_split: " + std::to_string(n) + " items with val_frac " +
                                std::to_string(val_frac) + " leave an empty side");
  }
  Rng rng(derive_seed(seed, 0x7a1));
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  TrainValSplit out;
  out.val.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_val));
  out.train.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_val), perm.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.train.begin(), out.train.end());
  return out;
}

}  // namespace ssorl::data
