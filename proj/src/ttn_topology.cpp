#include <algorithm>
#include <functional>
#include <limits>
#include <set>

#include "httn/ttn.hpp"

namespace httn::ttn {

TreeTopology::TreeTopology(std::vector<std::size_t> site_dims, std::vector<std::vector<LegRef>> node_legs,
                           std::vector<std::size_t> link_dims, std::size_t root)
    : site_dims_(std::move(site_dims)), legs_(std::move(node_legs)), root_(root) {
  if (legs_.empty()) throw std::invalid_argument("tree needs at least one node");
  if (root_ >= legs_.size()) throw std::invalid_argument("root node out of range");
  links_.resize(link_dims.size());
  std::vector<int> seen(link_dims.size(), 0);
  std::vector<int> site_seen(site_dims_.size(), 0);
  for (std::size_t n = 0; n < legs_.size(); ++n) {
    for (std::size_t l = 0; l < legs_[n].size(); ++l) {
      const LegRef& ref = legs_[n][l];
      if (ref.is_site()) {
        if (ref.id >= site_dims_.size()) throw std::invalid_argument("site index out of range");
        ++site_seen[ref.id];
      } else {
        if (ref.id >= links_.size()) throw std::invalid_argument("link index out of range");
        if (seen[ref.id] >= 2) throw std::invalid_argument("link attached to more than two legs");
        links_[ref.id].node[seen[ref.id]] = n;
        links_[ref.id].leg[seen[ref.id]] = l;
        ++seen[ref.id];
      }
    }
  }
  for (std::size_t i = 0; i < links_.size(); ++i) {
    if (seen[i] != 2) throw std::invalid_argument("every link must join exactly two legs");
    if (links_[i].node[0] == links_[i].node[1]) throw std::invalid_argument("self links are not allowed");
    if (link_dims[i] == 0) throw std::invalid_argument("link dimensions must be positive");
    links_[i].dim = link_dims[i];
  }
  for (auto c : site_seen)
    if (c != 1) throw std::invalid_argument("every site must sit on exactly one leg");
  for (auto d : site_dims_)
    if (d == 0) throw std::invalid_argument("site dimensions must be positive");
  if (links_.size() + 1 != legs_.size()) throw std::invalid_argument("graph is not a tree (edge count)");
  build_index();
}

void TreeTopology::build_index() {
  // connectivity
  std::vector<bool> reached(legs_.size(), false);
  std::vector<std::size_t> stack{root_};
  reached[root_] = true;
  while (!stack.empty()) {
    const std::size_t n = stack.back();
    stack.pop_back();
    for (auto [m, leg] : neighbors(n)) {
      (void)leg;
      if (!reached[m]) reached[m] = true, stack.push_back(m);
    }
  }
  if (std::find(reached.begin(), reached.end(), false) != reached.end())
    throw std::invalid_argument("graph is not connected");

  site_location_.assign(site_dims_.size(), {0, 0});
  for (std::size_t n = 0; n < legs_.size(); ++n)
    for (std::size_t l = 0; l < legs_[n].size(); ++l)
      if (legs_[n][l].is_site()) site_location_[legs_[n][l].id] = {n, l};

  leaf_position_.assign(site_dims_.size(), 0);
  std::size_t counter = 0;
  std::function<void(std::size_t, std::size_t)> visit = [&](std::size_t n, std::size_t parent) {
    for (std::size_t l = 0; l < legs_[n].size(); ++l) {
      const LegRef& ref = legs_[n][l];
      if (ref.is_site()) {
        leaf_position_[ref.id] = counter++;
      } else {
        const Link& k = links_[ref.id];
        const std::size_t m = k.node[0] == n ? k.node[1] : k.node[0];
        if (m != parent) visit(m, n);
      }
    }
  };
  visit(root_, std::numeric_limits<std::size_t>::max());

  side_nodes_.clear();
  side_sites_.clear();
  for (const Link& k : links_) {
    for (int dir = 0; dir < 2; ++dir) {
      const std::size_t from = k.node[dir], to = k.node[1 - dir];
      std::vector<std::size_t> nodes, sites;
      std::vector<std::pair<std::size_t, std::size_t>> todo{{from, to}};
      while (!todo.empty()) {
        auto [n, parent] = todo.back();
        todo.pop_back();
        nodes.push_back(n);
        for (const LegRef& ref : legs_[n]) {
          if (ref.is_site()) {
            sites.push_back(ref.id);
          } else {
            const Link& kk = links_[ref.id];
            const std::size_t m = kk.node[0] == n ? kk.node[1] : kk.node[0];
            if (m != parent) todo.push_back({m, n});
          }
        }
      }
      std::sort(nodes.begin(), nodes.end());
      std::sort(sites.begin(), sites.end());
      side_nodes_[{from, to}] = std::move(nodes);
      side_sites_[{from, to}] = std::move(sites);
    }
  }
}

TreeTopology TreeTopology::binary(std::vector<std::size_t> leaf_order, std::vector<std::size_t> site_dims,
                                  std::size_t chi) {
  const std::size_t n = leaf_order.size();
  if (n < 4 || (n & (n - 1)) != 0) throw std::invalid_argument("binary tree needs a power-of-two site count >= 4");
  if (site_dims.size() != n) throw std::invalid_argument("one dimension per site expected");
  if (chi < 1) throw std::invalid_argument("bond dimension must be positive");
  {
    std::vector<std::size_t> sorted = leaf_order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < n; ++i)
      if (sorted[i] != i) throw std::invalid_argument("leaf order must be a permutation of the sites");
  }
  auto capped = [](std::size_t a, std::size_t b) {
    const std::size_t cap = std::size_t{1} << 40;
    return (a >= cap || b >= cap || a * b >= cap) ? cap : a * b;
  };
  std::vector<std::vector<LegRef>> legs;
  std::vector<std::size_t> link_dims;
  // each entry: node id, product of site dims below, pending up-leg slot
  std::vector<std::pair<std::size_t, std::size_t>> level;
  std::vector<std::pair<std::size_t, std::size_t>> children;  // (left, right) per node of current layer
  for (std::size_t k = 0; k < n / 2; ++k) {
    legs.push_back({LegRef::site(leaf_order[2 * k]), LegRef::site(leaf_order[2 * k + 1])});
    level.push_back({legs.size() - 1, capped(site_dims[leaf_order[2 * k]], site_dims[leaf_order[2 * k + 1]])});
  }
  while (true) {
    if (level.size() == 2) {
      const std::size_t id = link_dims.size();
      link_dims.push_back(std::min(chi, std::min(level[0].second, level[1].second)));
      legs[level[0].first].push_back(LegRef::link(id));
      legs[level[1].first].push_back(LegRef::link(id));
      break;
    }
    std::vector<std::pair<std::size_t, std::size_t>> next;
    for (std::size_t k = 0; k < level.size(); k += 2) {
      std::vector<LegRef> node_legs;
      std::size_t below = 1;
      for (std::size_t c = k; c < k + 2; ++c) {
        const std::size_t id = link_dims.size();
        link_dims.push_back(std::min(chi, level[c].second));
        legs[level[c].first].push_back(LegRef::link(id));
        node_legs.push_back(LegRef::link(id));
        below = capped(below, level[c].second);
      }
      legs.push_back(node_legs);
      next.push_back({legs.size() - 1, below});
    }
    level = std::move(next);
  }
  const std::size_t root = legs.size() - 2;
  return TreeTopology(std::move(site_dims), std::move(legs), std::move(link_dims), root);
}

TreeTopology TreeTopology::merged(const std::vector<std::size_t>& nodes, std::vector<std::size_t>* mapping) const {
  if (nodes.empty()) throw std::invalid_argument("nothing to merge");
  std::set<std::size_t> group(nodes.begin(), nodes.end());
  for (auto n : group)
    if (n >= n_nodes()) throw std::invalid_argument("merge node out of range");
  // connectivity of the group
  {
    std::set<std::size_t> reached{*group.begin()};
    std::vector<std::size_t> stack{*group.begin()};
    while (!stack.empty()) {
      const std::size_t n = stack.back();
      stack.pop_back();
      for (auto [m, leg] : neighbors(n)) {
        (void)leg;
        if (group.count(m) && !reached.count(m)) reached.insert(m), stack.push_back(m);
      }
    }
    if (reached.size() != group.size()) throw std::invalid_argument("merged nodes must be connected");
  }
  std::vector<std::size_t> map(n_nodes());
  std::size_t next = 0;
  for (std::size_t n = 0; n < n_nodes(); ++n)
    if (!group.count(n)) map[n] = next++;
  const std::size_t merged_id = next;
  for (auto n : group) map[n] = merged_id;

  // external legs of the group with their ordering key
  std::vector<std::pair<std::size_t, LegRef>> external;
  for (auto n : group) {
    for (const LegRef& ref : legs_[n]) {
      if (ref.is_site()) {
        external.push_back({leaf_position_[ref.id], ref});
        continue;
      }
      const Link& k = links_[ref.id];
      const std::size_t m = k.node[0] == n ? k.node[1] : k.node[0];
      if (group.count(m)) continue;
      std::size_t key = std::numeric_limits<std::size_t>::max();
      for (auto s : side_sites(m, n)) key = std::min(key, leaf_position_[s]);
      external.push_back({key, ref});
    }
  }
  std::sort(external.begin(), external.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<std::size_t> link_map(n_links(), std::numeric_limits<std::size_t>::max());
  std::vector<std::size_t> new_dims;
  for (std::size_t i = 0; i < n_links(); ++i) {
    const Link& k = links_[i];
    if (group.count(k.node[0]) && group.count(k.node[1])) continue;
    link_map[i] = new_dims.size();
    new_dims.push_back(k.dim);
  }
  auto remap = [&](const LegRef& r) { return r.is_site() ? r : LegRef::link(link_map[r.id]); };
  std::vector<std::vector<LegRef>> new_legs(merged_id + 1);
  for (std::size_t n = 0; n < n_nodes(); ++n) {
    if (group.count(n)) continue;
    for (const LegRef& r : legs_[n]) new_legs[map[n]].push_back(remap(r));
  }
  for (const auto& [key, r] : external) new_legs[merged_id].push_back(remap(r));
  if (mapping) *mapping = map;
  return TreeTopology(site_dims_, std::move(new_legs), std::move(new_dims), map[root_]);
}

std::size_t TreeTopology::leg_dim(std::size_t node, std::size_t leg) const {
  const LegRef& r = legs_.at(node).at(leg);
  return r.is_site() ? site_dims_[r.id] : links_[r.id].dim;
}

std::vector<std::size_t> TreeTopology::leg_dims(std::size_t node) const {
  std::vector<std::size_t> d;
  for (std::size_t l = 0; l < legs_.at(node).size(); ++l) d.push_back(leg_dim(node, l));
  return d;
}

std::vector<std::pair<std::size_t, std::size_t>> TreeTopology::neighbors(std::size_t node) const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const auto& l = legs_.at(node);
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (l[i].is_site()) continue;
    const Link& k = links_[l[i].id];
    out.push_back({k.node[0] == node ? k.node[1] : k.node[0], i});
  }
  return out;
}

bool TreeTopology::adjacent(std::size_t a, std::size_t b) const {
  for (auto [m, leg] : neighbors(a)) {
    (void)leg;
    if (m == b) return true;
  }
  return false;
}

std::size_t TreeTopology::leg_toward(std::size_t node, std::size_t neighbor) const {
  for (auto [m, leg] : neighbors(node))
    if (m == neighbor) return leg;
  throw PathError("nodes " + std::to_string(node) + " and " + std::to_string(neighbor) + " are not adjacent");
}

std::size_t TreeTopology::leg_toward_any(std::size_t node, std::size_t target) const {
  const auto p = path(node, target);
  if (p.size() < 2) throw PathError("node has no leg towards itself");
  return leg_toward(node, p[1]);
}

std::vector<std::size_t> TreeTopology::path(std::size_t a, std::size_t b) const {
  if (a >= n_nodes() || b >= n_nodes()) throw PathError("path endpoint out of range");
  std::vector<std::size_t> parent(n_nodes(), std::numeric_limits<std::size_t>::max());
  std::vector<std::size_t> queue{a};
  parent[a] = a;
  for (std::size_t i = 0; i < queue.size(); ++i) {
    for (auto [m, leg] : neighbors(queue[i])) {
      (void)leg;
      if (parent[m] == std::numeric_limits<std::size_t>::max()) parent[m] = queue[i], queue.push_back(m);
    }
  }
  std::vector<std::size_t> out{b};
  while (out.back() != a) out.push_back(parent[out.back()]);
  std::reverse(out.begin(), out.end());
  return out;
}

const std::vector<std::size_t>& TreeTopology::side(std::size_t from, std::size_t to) const {
  auto it = side_nodes_.find({from, to});
  if (it == side_nodes_.end()) throw PathError("side(): nodes are not adjacent");
  return it->second;
}

const std::vector<std::size_t>& TreeTopology::side_sites(std::size_t from, std::size_t to) const {
  auto it = side_sites_.find({from, to});
  if (it == side_sites_.end()) throw PathError("side_sites(): nodes are not adjacent");
  return it->second;
}

std::vector<std::size_t> TreeTopology::preorder(std::size_t start) const {
  std::vector<std::size_t> out;
  std::function<void(std::size_t, std::size_t)> visit = [&](std::size_t n, std::size_t parent) {
    out.push_back(n);
    for (auto [m, leg] : neighbors(n)) {
      (void)leg;
      if (m != parent) visit(m, n);
    }
  };
  visit(start, std::numeric_limits<std::size_t>::max());
  return out;
}

std::pair<std::size_t, std::size_t> TreeTopology::site_location(std::size_t site) const {
  return site_location_.at(site);
}

std::size_t TreeTopology::covering_node(const std::vector<std::size_t>& sites) const {
  if (sites.empty()) return root_;
  std::vector<std::size_t> common = path(root_, site_location(sites.front()).first);
  for (std::size_t i = 1; i < sites.size(); ++i) {
    const auto p = path(root_, site_location(sites[i]).first);
    std::size_t k = 0;
    while (k < common.size() && k < p.size() && common[k] == p[k]) ++k;
    common.resize(k);
  }
  return common.back();
}

std::vector<std::size_t> domino_quadtree_order(std::size_t lx, std::size_t ly) {
  if (lx == 0 || ly == 0) throw std::invalid_argument("lattice sides must be positive");
  std::vector<std::size_t> out;
  std::function<void(std::size_t, std::size_t, std::size_t, std::size_t)> split =
      [&](std::size_t r0, std::size_t c0, std::size_t h, std::size_t w) {
        if (h * w == 1) {
          out.push_back(r0 * lx + c0);
          return;
        }
        if (h > w) {
          split(r0, c0, h / 2, w);
          split(r0 + h / 2, c0, h - h / 2, w);
        } else {
          split(r0, c0, h, w / 2);
          split(r0, c0 + w / 2, h, w - w / 2);
        }
      };
  split(0, 0, ly, lx);
  return out;
}

}  // namespace httn::ttn
