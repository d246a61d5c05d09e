#pragma once
#include <string>
#include <vector>

#include "hierform/errors.hpp"

namespace hierform {

enum class FamilyId { Gaussian, Poisson, ZeroInflatedPoisson };
enum class Link { Identity, Log, Logit };

inline const char* link_name(Link l) {
  switch (l) {
    case Link::Identity: return "identity";
    case Link::Log: return "log";
    case Link::Logit: return "logit";
  }
  return "?";
}

struct FamilyInfo {
  FamilyId id;
  std::string name;
  Link mu_link;
  // distributional parameters beyond mu, with their links and the constant
  // used when the parameter carries no formula of its own
  std::vector<std::string> extra_dpars;
  std::vector<Link> extra_links;
  bool integer_response;
};

inline FamilyInfo family_info(FamilyId id) {
  switch (id) {
    case FamilyId::Gaussian:
      return {id, "gaussian", Link::Identity, {"sigma"}, {Link::Log}, false};
    case FamilyId::Poisson:
      return {id, "poisson", Link::Log, {}, {}, true};
    case FamilyId::ZeroInflatedPoisson:
      return {id, "zero_inflated_poisson", Link::Log, {"zi"}, {Link::Logit}, true};
  }
  throw ValidationError("unknown family");
}

inline FamilyId parse_family(const std::string& name) {
  if (name == "gaussian") return FamilyId::Gaussian;
  if (name == "poisson") return FamilyId::Poisson;
  if (name == "zero_inflated_poisson") return FamilyId::ZeroInflatedPoisson;
  throw ValidationError("unknown family '" + name +
                        "' (available: gaussian, poisson, zero_inflated_poisson)");
}

inline Link parse_link(const std::string& name) {
  if (name == "identity") return Link::Identity;
  if (name == "log") return Link::Log;
  if (name == "logit") return Link::Logit;
  throw ValidationError("unknown link '" + name + "'");
}

}  // namespace hierform
