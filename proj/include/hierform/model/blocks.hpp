#pragma once
// Resolution of group terms across all parameter formulas into variance
// component blocks.  Terms sharing a |ID| tag are merged into one block so
// their coefficients get a joint correlation matrix; the groupings must agree.

#include <memory>
#include <string>
#include <vector>

#include "hierform/formula/print.hpp"
#include "hierform/model/group_expr.hpp"
#include "hierform/model/spec.hpp"

namespace hierform {

struct BlockTerm {
  std::string owner;  // "mu", a dpar name, or a non-linear parameter name
  std::shared_ptr<TermList> inner;
  std::string inner_text;
  bool double_bar = false;
};

struct GroupBlockSpec {
  Grouping grouping;
  std::vector<BlockTerm> terms;  // owner-major, declaration order
  bool correlated = true;
  std::string id;  // "" unless formed by |ID| merging
};

inline std::vector<GroupBlockSpec> resolve_blocks(const ModelSpec& spec) {
  std::vector<GroupBlockSpec> blocks;
  std::vector<std::string> id_of_block;  // parallel; "" = not mergeable

  auto visit_owner = [&](const std::string& owner, const TermList& tl) {
    for (const auto& gt : tl.groups) {
      const auto groupings = expand_group_expr(gt.group);
      for (const auto& grouping : groupings) {
        BlockTerm bt;
        bt.owner = owner;
        bt.inner = gt.inner;
        bt.inner_text = term_list_to_text(*gt.inner);
        bt.double_bar = gt.double_bar;

        if (!gt.id.empty()) {
          if (groupings.size() > 1)
            throw ValidationError("correlation ID '" + gt.id +
                                  "' cannot tag a term that expands to several groupings");
          int found = -1;
          for (std::size_t b = 0; b < blocks.size(); ++b)
            if (id_of_block[b] == gt.id) found = static_cast<int>(b);
          if (found >= 0) {
            if (!(blocks[static_cast<std::size_t>(found)].grouping == grouping))
              throw ValidationError("correlation ID '" + gt.id +
                                    "' is used with different grouping factors");
            blocks[static_cast<std::size_t>(found)].terms.push_back(std::move(bt));
            continue;
          }
          GroupBlockSpec nb;
          nb.grouping = grouping;
          nb.correlated = !gt.double_bar;
          nb.id = gt.id;
          nb.terms.push_back(std::move(bt));
          blocks.push_back(std::move(nb));
          id_of_block.push_back(gt.id);
          continue;
        }

        GroupBlockSpec nb;
        nb.grouping = grouping;
        nb.correlated = !gt.double_bar;
        nb.terms.push_back(std::move(bt));
        blocks.push_back(std::move(nb));
        id_of_block.push_back("");
      }
    }
  };

  if (!spec.nonlinear) visit_owner("mu", spec.main.terms);
  for (const auto& e : spec.extras) visit_owner(e.name, e.ast.terms);
  return blocks;
}

}  // namespace hierform
